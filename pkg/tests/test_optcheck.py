"""First- and second-order optimality checks on the four reference problems."""

from sonoc import optcheck
from sonoc.conecalc import UnionCone
from sonoc.ratlin import Q, vec

from conftest import cone, poly


def ucone(branches, dim):
    return UnionCone.make(list(branches), dim)


# ---------------------------------------------------------------------------
# touching-circles problem: f = -x²/2, g = (x², x), Λ = two tangent unit balls


def test_circles_critical_cone(circles):
    c = optcheck.critical_cone(circles)
    assert c.set_equal(ucone([cone([], [[1]], 1)], 1))


def test_circles_cq_and_multipliers(circles):
    d = vec([1])
    cq = optcheck.check_cq(circles, d, "DirRCQ")
    assert not cq.holds
    assert cq.certificate["lambda"] == vec([1, 0])
    assert not optcheck.check_cq(circles, d, "FOSCMS").holds
    assert optcheck.has_ms_certificate(circles, d) is None
    fam = optcheck.multiplier_sets(circles, d, "M")
    assert not fam.is_empty()
    assert fam.contains(vec([1, 0]))


def test_circles_primal_and_dual(circles):
    d = vec([1])
    primal = optcheck.primal_second_order_check(circles, d)
    assert primal.verdict == "Fails"
    assert primal.certificate["value"] == Q(-1)
    dual_full = optcheck.dual_m_second_order_check(circles, d, "full")
    assert dual_full.verdict == "Holds"
    assert dual_full.certificate["lambda"] == vec([1, 0])
    dual_mid = optcheck.dual_m_second_order_check(circles, d, "mid")
    assert dual_mid.verdict == "Fails"


def test_circles_classification(circles):
    report = optcheck.classify_point(circles)
    assert report.classification == "NotLocalMin"
    # rejection without any CQ certificate needs an explicit descent arc
    assert report.certificate.get("arc") is not None


# ---------------------------------------------------------------------------
# MPCC with a descent direction (0, t, t)


def test_mpcc1_critical_cone(mpcc1):
    c = optcheck.critical_cone(mpcc1)
    assert c.set_equal(ucone([cone([[0, 1, 1]], [], 3)], 3))


def test_mpcc1_cqs(mpcc1):
    d = vec([0, 1, 1])
    assert optcheck.check_cq(mpcc1, d, "DirRCQ").holds
    assert optcheck.check_cq(mpcc1, d, "DirNondegen").holds
    nd = optcheck.check_cq(mpcc1, d, "Nondegen")
    assert not nd.holds
    # the whole-point nondegeneracy fails along a kernel/normal-span direction
    cert = nd.certificate["lambda"]
    scaled = vec([4, -4, -1, 1])
    assert cert == scaled or cert == tuple(-c for c in scaled)


def test_mpcc1_multiplier_sets(mpcc1):
    d = vec([0, 1, 1])
    lam0 = vec([-3, 0, 1, 0])
    for kind in ("M", "C", "S"):
        fam = optcheck.multiplier_sets(mpcc1, d, kind)
        assert len(fam.branches) == 1
        b = fam.branches[0]
        assert b.verts == (lam0,) and not b.rays and not b.lin
    classical = optcheck.multiplier_sets(mpcc1, d, "Classical")
    assert classical.contains(lam0)


def test_mpcc1_second_order_checks(mpcc1):
    d = vec([0, 1, 1])
    primal = optcheck.primal_second_order_check(mpcc1, d)
    assert primal.verdict == "Fails" and primal.certificate["value"] == Q(-1)
    clarke = optcheck.clarke_second_order_check(mpcc1, d)
    assert clarke.verdict == "Fails" and clarke.certificate["value"] == Q(-1)
    singleton = optcheck.singleton_second_order_check(mpcc1, d)
    assert singleton.verdict == "Fails"
    assert singleton.certificate["lambda"] == vec([-3, 0, 1, 0])
    assert singleton.certificate["value"] == Q(-1)


def test_mpcc1_classification(mpcc1):
    report = optcheck.classify_point(mpcc1)
    assert report.classification == "NotLocalMin"


def test_mpcc1_descent_arc(mpcc1):
    arc = optcheck.descent_arc_certificate(mpcc1, vec([0, 1, 1]), vec([0, 0, 0]))
    assert arc is not None


# ---------------------------------------------------------------------------
# MPCC variant with +x₂² curing the descent: strict local minimizer


def test_mpcc2_singleton_margin(mpcc2):
    d = vec([0, 1, 1])
    singleton = optcheck.singleton_second_order_check(mpcc2, d)
    assert singleton.verdict == "Holds"
    assert singleton.certificate["value"] == Q(1)


def test_mpcc2_sufficient_and_classification(mpcc2):
    suff = optcheck.sufficient_second_order_check(mpcc2)
    assert suff.verdict == "Certified"
    report = optcheck.classify_point(mpcc2)
    assert report.classification == "StrictLocalMin"


# ---------------------------------------------------------------------------
# two-branch critical cone with an α = 0 witness on one branch


def test_twobranch_critical_cone(twobranch):
    c = optcheck.critical_cone(twobranch)
    expected = ucone(
        [cone([[1, 0]], [], 2), cone([[0, 1]], [], 2)], 2
    )
    assert c.set_equal(expected)


def test_twobranch_sufficient_witnesses(twobranch):
    db = optcheck.DerivativeBundle.from_problem(twobranch)
    d1, d2 = vec([1, 0]), vec([0, 1])
    alpha1, lam1, margin1 = optcheck._sufficient_ray_lp(twobranch, db, d1)
    assert (alpha1, lam1) == (Q(0), vec([0, -1, 1]))
    alpha2, lam2, margin2 = optcheck._sufficient_ray_lp(twobranch, db, d2)
    assert (alpha2, lam2) == (Q(1), vec([-1, 0, 0]))


def test_twobranch_classification(twobranch):
    suff = optcheck.sufficient_second_order_check(twobranch)
    assert suff.verdict == "Certified"
    report = optcheck.classify_point(twobranch)
    assert report.classification == "StrictLocalMin"


# ---------------------------------------------------------------------------
# generic behaviour


def test_first_order_condition_reported_first(mpcc1):
    report = optcheck.classify_point(mpcc1)
    for dr in report.directions:
        assert dr.checks[0].check_id == "FirstOrderM"


def test_dual_dominance(circles, mpcc1, mpcc2, twobranch):
    # FullSpace Fails must imply Amid Fails (never the reverse)
    for p in (circles, mpcc1, mpcc2, twobranch):
        c = optcheck.critical_cone(p)
        for b in c.branches:
            for d in b.generators():
                if all(x == 0 for x in d):
                    continue
                full = optcheck.dual_m_second_order_check(p, d, "full")
                mid = optcheck.dual_m_second_order_check(p, d, "mid")
                if full.verdict == "Fails":
                    assert mid.verdict in ("Fails", "Undetermined")
