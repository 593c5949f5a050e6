import random
from fractions import Fraction as Q

import pytest

from kstab.exactcore import Interval, PiecewisePolynomial, Poly
from kstab.formulas import k3
from kstab.functionals import (DeltaBoundReport, FlagCase, FlagChamber,
                               FlagPoint, MissingMultiplicity,
                               NonPositiveDiscrepancyWarning, ZeroS,
                               beta_divisor, delta_bound_report, f_q_term,
                               log_discrepancy_weighted_blowup, s_flag_point,
                               s_flag_surface, s_flag_surface_report,
                               s_from_volume, s_from_volume_report)
from kstab.runner import flag_case
from kstab.zariski import SurfaceLattice

AFF = Poly.affine
U = Poly.var("u")


def box_volume(a_top):
    return PiecewisePolynomial([(Interval(0, 1), Poly.const(a_top))])


class TestSFromVolume:
    def test_box(self):
        assert s_from_volume(box_volume(7), 7) == 1

    def test_provenance_sums(self):
        vol = PiecewisePolynomial([
            (Interval(0, 1), Poly.from_coeffs([13, 0, 0, -1])),
            (Interval(1, 2), Poly.from_coeffs([12, 3, -3])),
            (Interval(2, 3), Poly.from_coeffs([0, 27, -18, 3])),
        ])
        report = s_from_volume_report(vol, 13)
        assert report.value == Q(49, 26)
        assert sum(c for _, c in report.contributions) == report.value

    def test_scaling_invariance(self):
        rng = random.Random(31)
        vol = PiecewisePolynomial([
            (Interval(0, 2), Poly.from_coeffs([4, 0, -1]))])
        base = s_from_volume(vol, 4)
        for _ in range(20):
            t = Q(rng.randint(1, 9), rng.randint(1, 9))
            scaled = PiecewisePolynomial([
                (Interval(0, 2), Poly.from_coeffs([4 * t, 0, -t]))])
            assert s_from_volume(scaled, 4 * t) == base


class TestBeta:
    def test_doubled_degeneration_values(self):
        vol42 = PiecewisePolynomial([
            (Interval(0, 1), Poly.from_coeffs([28, 0, -24, 8])),
            (Interval(1, 2), Poly.from_coeffs([48, -48, 12])),
        ])
        assert beta_divisor(1, vol42, 28) == Q(1, 14)
        vol39 = PiecewisePolynomial([
            (Interval(0, 1), Poly.from_coeffs([26, 0, -36, 16])),
            (Interval(1, Q(3, 2)), Poly.from_coeffs([54, -72, 24])),
        ])
        assert beta_divisor(1, vol39, 26) == Q(7, 26)

    def test_zero(self):
        vol = box_volume(5)
        assert beta_divisor(1, vol, 5) == 0


class TestFlagValues:
    def test_all_bundled_flag_surfaces(self):
        expected = {
            "a1-flag-e": Q(20, 13),
            "a1-flag-C-ordinary": Q(29, 26),
            "a1-flag-C-weighted": Q(49, 26),
            "mm39-flag-s": Q(5, 13),
            "a2-flag-C1": Q(10, 13),
            "a2-flag-C3": Q(10, 39),
            "a2-flag-pencil": Q(9, 26),
            "base-transversal": Q(29, 26),
            "base-tangential": Q(49, 26),
        }
        for name, value in expected.items():
            assert s_flag_surface(flag_case(name)) == value, name

    def test_point_values(self):
        assert s_flag_point(flag_case("a1-flag-e"), "O") == Q(10, 13)
        assert s_flag_point(flag_case("a1-flag-C-ordinary"), "Qgen") == \
            Q(9, 26)
        assert s_flag_point(flag_case("a2-flag-C1"), "Q13") == Q(10, 39)
        assert s_flag_point(flag_case("a2-flag-C3"), "Qgen") == Q(9, 26)
        assert s_flag_point(flag_case("a2-flag-pencil"), "Qgen") == Q(10, 39)

    def test_f_q_values(self):
        assert f_q_term(flag_case("a1-flag-C-ordinary"), "Qf") == Q(11, 26)
        assert f_q_term(flag_case("a1-flag-C-ordinary"), "Qgen") == 0
        assert f_q_term(flag_case("a2-flag-C1"), "Q13") == Q(1, 12)
        assert f_q_term(flag_case("a2-flag-C1"), "QB") == 0

    def test_point_decomposition(self):
        # S(W; Q) is always the quadratic part plus the local correction.
        for name, pt in (("a1-flag-C-weighted", "Qf"), ("a2-flag-C1", "Q13")):
            case = flag_case(name)
            generic = next(p.name for p in case.points if not p.mults)
            assert s_flag_point(case, pt) == \
                s_flag_point(case, generic) + f_q_term(case, pt)

    def test_missing_point(self):
        with pytest.raises(MissingMultiplicity):
            f_q_term(flag_case("a1-flag-e"), "nowhere")

    def test_refinement_invariance(self):
        # Splitting outer chambers at extra rational walls cannot change
        # the nested functional.
        base = flag_case("a1-flag-C-weighted")
        value = s_flag_surface(base)
        split_chambers = []
        for ch in base.chambers:
            mid = ch.interval.midpoint()
            split_chambers.append(FlagChamber(
                Interval(ch.interval.lo, mid), ch.family, ch.outer_negative))
            split_chambers.append(FlagChamber(
                Interval(mid, ch.interval.hi), ch.family, ch.outer_negative))
        refined = FlagCase(
            label="refined", lattice=base.lattice, flag=base.flag,
            dim=base.dim, ample_power=base.ample_power,
            flag_log_discrepancy=base.flag_log_discrepancy,
            chambers=split_chambers, sigma=base.sigma, points=base.points)
        assert s_flag_surface(refined) == value
        assert s_flag_point(refined, "Qf") == s_flag_point(base, "Qf")

    def test_outer_data_is_affine_consistent(self):
        # Family plus outer negative part must glue to one affine family
        # across all chambers (restriction of an affine pullback).
        for name in ("a2-flag-C1", "a2-flag-C3", "a2-flag-pencil"):
            case = flag_case(name)
            totals = []
            for ch in case.chambers:
                total = {}
                for k in set(ch.family) | set(ch.outer_negative):
                    total[k] = ch.family.get(k, Poly()) + \
                        ch.outer_negative.get(k, Poly())
                totals.append(total)
            for t in totals[1:]:
                assert t == totals[0]


class TestClosedFormAgreement:
    def base_case(self, a, d, mu, tangential):
        g = d * mu
        if tangential:
            lat = SurfaceLattice(("S", "f", "E"),
                                 [[-g, 1, 0], [1, -2, 1], [0, 1, Q(-1, 2)]])
            w = 2
        else:
            lat = SurfaceLattice(("S", "f", "E"),
                                 [[-g, 1, 0], [1, -1, 1], [0, 1, -1]])
            w = 1
        top = (a - 1) / mu
        end = a / mu
        chambers = [
            FlagChamber(Interval(0, top),
                        {"S": Poly.const(1), "f": AFF(a * g, -mu * g),
                         "E": AFF(w * a * g, -w * mu * g)}, {}),
            FlagChamber(Interval(top, end),
                        {"S": AFF(a, -mu), "f": AFF(a * g, -mu * g),
                         "E": AFF(w * a * g, -w * mu * g)},
                        {"S": AFF(1 - a, mu)}),
        ]
        a_top = d * (a ** 3 - (a - 1) ** 3)
        a_log = Q(2) if tangential else Q(3, 2)
        return FlagCase("base", lat, "E", 3, a_top, a_log, chambers,
                        points=(FlagPoint("Qf", {"f": Q(1)}),
                                FlagPoint("Qgen", {})))

    @pytest.mark.parametrize("a,d,mu", [
        (Q(3, 2), Q(4), Q(1, 2)),
        (Q(2), Q(3), Q(1)),
        (Q(5, 3), Q(2), Q(1)),
    ])
    def test_transversal_closed_form(self, a, d, mu):
        g = d * mu
        case = self.base_case(a, d, mu, tangential=False)
        expected = (4 * a ** 3 * g + 6 * (1 - g) * a ** 2
                    + 4 * (g - 2) * a - g + 3) / \
            (4 * (3 * a ** 2 - 3 * a + 1))
        assert s_flag_surface(case) == expected
        quad = (6 * a ** 2 - 8 * a + 3) / (4 * (3 * a ** 2 - 3 * a + 1))
        assert s_flag_point(case, "Qgen") == quad
        fiber = g * (2 * a - 1) * (2 * a ** 2 - 2 * a + 1) / \
            (4 * (3 * a ** 2 - 3 * a + 1))
        assert s_flag_point(case, "Qf") == fiber

    @pytest.mark.parametrize("a,d,mu", [
        (Q(3, 2), Q(4), Q(1, 2)),
        (Q(2), Q(3), Q(1)),
    ])
    def test_tangential_closed_form(self, a, d, mu):
        g = d * mu
        case = self.base_case(a, d, mu, tangential=True)
        expected = (8 * a ** 3 * g + 6 * (1 - 2 * g) * a ** 2
                    + 8 * (g - 1) * a - 2 * g + 3) / \
            (4 * (3 * a ** 2 - 3 * a + 1))
        assert s_flag_surface(case) == expected
        # The tangential flag functional equals twice the threefold bound.
        assert s_flag_surface(case) == 2 * k3(a, d, mu)
        quad = (6 * a ** 2 - 8 * a + 3) / (8 * (3 * a ** 2 - 3 * a + 1))
        assert s_flag_point(case, "Qgen") == quad
        fiber = g * (2 * a - 1) * (2 * a ** 2 - 2 * a + 1) / \
            (4 * (3 * a ** 2 - 3 * a + 1))
        assert s_flag_point(case, "Qf") == fiber


class TestLogDiscrepancy:
    def test_transversal(self):
        assert log_discrepancy_weighted_blowup(1, 1, [(Q(1, 2), 1)]) == \
            Q(3, 2)

    def test_tangential(self):
        assert log_discrepancy_weighted_blowup(1, 2, [(Q(1, 2), 2)]) == 2

    def test_smooth_point(self):
        assert log_discrepancy_weighted_blowup(1, 1) == 2

    def test_non_klt_warns(self):
        with pytest.warns(NonPositiveDiscrepancyWarning):
            log_discrepancy_weighted_blowup(1, 1, [(2, 1)])


class TestDeltaBounds:
    def test_on_section(self):
        report = delta_bound_report([
            ("negative section", 1, Q(17, 26)),
            ("base flags", Q(3, 2), Q(15, 13)),
        ])
        assert report.value == Q(13, 10)
        assert report.exceeds_one

    def test_off_section(self):
        report = delta_bound_report([
            ("vertical surface", 1, Q(10, 13)),
            ("transversal flag", Q(3, 2), Q(29, 26)),
            ("transversal fiber point", 1, Q(10, 13)),
            ("transversal branch point", Q(1, 2), Q(9, 26)),
            ("tangential flag", 2, Q(49, 26)),
            ("tangential fiber point", 1, Q(10, 13)),
            ("tangential branch point", Q(1, 2), Q(9, 52)),
        ])
        assert report.value == Q(52, 49)
        assert report.exceeds_one

    def test_single_entry(self):
        assert delta_bound_report([(1, 1)]).value == 1

    def test_zero_s(self):
        with pytest.raises(ZeroS):
            delta_bound_report([("bad", 1, 0)])
