from __future__ import annotations

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitrep.dynamics import apply_map, branch_structure
from orbitrep.errors import BasisMismatch, DomainError, NoCoreColumns
from orbitrep.numeric import MP, rational, render
from orbitrep.operators import (
    ONE_PHASE,
    ZERO_PHASE,
    SparseOperator,
    UnitComplex,
    build_Mk,
    build_T,
    build_U,
    build_V,
    commutant_certificate,
    default_test_vectors,
    diagonal,
    equivalence_report,
    extend_basis,
    mk_convergence,
    op_adjoint,
    remark_checks,
    verify_relations,
    word_operator,
)
from orbitrep.orbit import Verdict, basis_from_points, generalized_orbit, merge_bases
from orbitrep.symbolic import admissible_words, cylinder_interval

from conftest import BATTERY, spec_of

DOUBLING = spec_of("2", "0")
FEATURED = spec_of("2", "sqrt(2)-1")
THREE_HALVES = spec_of("3/2", "0")


def four_point_basis():
    return basis_from_points(DOUBLING, [rational(1, 3), rational(2, 3), rational(1, 6), rational(5, 6)])


def dense_T(spec, basis, i):
    """Oracle: matrix of T_i from the definition, entry (x, y) = 1 iff x in cell i and f(x) = y."""
    bs = branch_structure(spec)
    n = len(basis)
    m = np.zeros((n, n), dtype=np.int64)
    for r, x in enumerate(basis.points):
        if bs.branch_index(x) == i:
            fx = apply_map(spec, x)
            if fx in basis.index:
                m[r, basis.index[fx]] = 1
    return m


def to_dense(op: SparseOperator) -> np.ndarray:
    m = np.zeros((op.size, op.size), dtype=np.int64)
    for c, col in enumerate(op.columns):
        for r, v in col:
            assert v == ONE_PHASE
            m[r, c] = 1
    return m


def column_of(op, basis, y):
    return {basis.points[r]: v for r, v in op.column(basis.index[y]).items()}


class TestUnitComplex:
    def test_arithmetic(self):
        a, b = UnitComplex.of(rational(3, 4)), UnitComplex.of(rational(1, 2))
        assert (a * b).angle == rational(1, 4)
        assert a.conjugate().angle == rational(1, 4)
        assert (a * ZERO_PHASE).is_zero and (ZERO_PHASE * a).is_zero
        assert a * ONE_PHASE == a
        assert UnitComplex.of(rational(5, 4)) == UnitComplex.of(rational(1, 4))

    def test_value(self):
        z = UnitComplex.of(rational(1, 4)).to_mpc()
        assert abs(z - MP.mpc(0, 1)) < MP.mpf(10) ** -70
        assert ZERO_PHASE.to_mpc() == 0

    def test_approx_refused(self):
        from orbitrep.numeric import approx
        with pytest.raises(DomainError):
            UnitComplex.of(approx("0.5"))


class TestGenerators:
    def test_T_examples(self):
        basis = four_point_basis()
        t1, t2 = build_T(None, basis, 1), build_T(None, basis, 2)
        assert column_of(t1, basis, rational(1, 3)) == {rational(1, 6): ONE_PHASE}
        assert column_of(t1, basis, rational(2, 3)) == {rational(1, 3): ONE_PHASE}
        assert column_of(t2, basis, rational(1, 3)) == {rational(2, 3): ONE_PHASE}
        assert column_of(t2, basis, rational(2, 3)) == {rational(5, 6): ONE_PHASE}

    def test_truncated_column_is_not_core(self):
        basis = four_point_basis()
        t1 = build_T(None, basis, 1)
        assert not t1.domain_mask[basis.index[rational(1, 6)]]
        assert t1.domain_mask[basis.index[rational(1, 3)]]

    def test_three_halves_upper_column_is_exact_zero(self):
        basis = generalized_orbit(THREE_HALVES, 0, 4, 3)
        t2 = build_T(None, basis, 2)
        upper = [i for i, y in enumerate(basis.points) if y >= rational(1, 2)]
        assert upper
        for i in upper:
            assert t2.column(i) == {} and t2.domain_mask[i]

    def test_branch_range_and_mismatch(self):
        basis = four_point_basis()
        with pytest.raises(DomainError):
            build_T(None, basis, 3)
        with pytest.raises(BasisMismatch):
            build_T(branch_structure(FEATURED), basis, 1)

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_matches_dense_oracle(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, rational(1, 7), 3, 3)
        for i in range(1, basis.bs.n + 1):
            t = build_T(None, basis, i)
            want = dense_T(spec, basis, i)
            got = to_dense(t)
            core = t.domain_mask
            assert (got[:, core] == want[:, core]).all()
            # censored columns never show a wrong entry, only missing ones
            assert (got <= want).all()
            assert (to_dense(t.H).T == got).all()


class TestAdjoint:
    def test_examples(self):
        basis = four_point_basis()
        t1s = op_adjoint(build_T(None, basis, 1))
        assert column_of(t1s, basis, rational(1, 6)) == {rational(1, 3): ONE_PHASE}
        u = build_U(basis)
        for c, col in enumerate(op_adjoint(u).columns):
            ((r, v),) = col
            assert r == c and v == UnitComplex.of(-basis.points[c])
        z = SparseOperator.zero(basis)
        assert op_adjoint(z).nnz == 0

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_involution_and_product_rule(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, 0, 3, 3)
        n = basis.bs.n
        for i, j in product(range(1, n + 1), repeat=2):
            a, b = build_T(None, basis, i), build_T(None, basis, j)
            aa = a.H.H
            assert (aa.partial.tgt == a.partial.tgt).all()
            assert (aa.domain_mask == a.domain_mask).all()
            lhs, rhs = (a @ b).H, b.H @ a.H
            both, bad = lhs.compare(rhs)
            assert not bad[both].any()


class TestWords:
    def test_length_one(self):
        basis = generalized_orbit(FEATURED, 0, 3, 3)
        for i in (1, 2, 3):
            w, t = word_operator(None, basis, (i,)), build_T(None, basis, i)
            assert (w.partial.tgt == t.partial.tgt).all()

    def test_nested_inverse(self):
        basis = four_point_basis()
        w = word_operator(None, basis, (1, 2))
        assert column_of(w, basis, rational(1, 3)) == {rational(1, 3): ONE_PHASE}

    def test_empty_cylinder_is_zero_on_core(self):
        basis = generalized_orbit(THREE_HALVES, 0, 5, 4)
        assert cylinder_interval(THREE_HALVES, (2, 2)) is None
        w = word_operator(None, basis, (2, 2))
        for c in np.nonzero(w.domain_mask)[0]:
            assert w.column(c) == {}

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_product_of_words(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, rational(1, 5), 3, 4)
        pool = admissible_words(spec, 1) + admissible_words(spec, 2)
        for mu, nu in product(pool, repeat=2):
            whole = word_operator(None, basis, mu + nu)
            split = word_operator(None, basis, mu) @ word_operator(None, basis, nu)
            both, bad = whole.compare(split)
            assert not bad[both].any()

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_words_match_dense_products(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, rational(1, 5), 3, 4)
        n = basis.bs.n
        dense = {i: dense_T(spec, basis, i) for i in range(1, n + 1)}
        for w in product(range(1, n + 1), repeat=3):
            op = word_operator(None, basis, w)
            want = dense[w[0]] @ dense[w[1]] @ dense[w[2]]
            core = op.domain_mask
            assert (to_dense(op)[:, core] == want[:, core]).all()

    def test_empty_word_refused(self):
        with pytest.raises(DomainError):
            word_operator(None, four_point_basis(), ())


class TestVU:
    def test_V_examples(self):
        basis = four_point_basis()
        v = build_V(None, basis)
        assert column_of(v, basis, rational(1, 6)) == {rational(1, 3): ONE_PHASE}
        assert column_of(v, basis, rational(1, 3)) == {rational(2, 3): ONE_PHASE}
        assert column_of(v, basis, rational(2, 3)) == {rational(1, 3): ONE_PHASE}

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_V_sends_y_to_image(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, 0, 4, 3)
        v = build_V(None, basis)
        for c, y in enumerate(basis.points):
            fy = apply_map(spec, y)
            if fy in basis.index:
                assert v.column(c) == {basis.index[fy]: ONE_PHASE}
            else:
                assert v.column(c) == {}

    def test_rotation_V_is_permutation(self):
        rot = spec_of("1", "1/4")
        basis = generalized_orbit(rot, 0, 3, 2)
        assert set(basis.points) == {rational(k, 4) for k in range(4)}
        dense = to_dense(build_V(None, basis))
        assert (dense.sum(axis=0) == 1).all() and (dense.sum(axis=1) == 1).all()
        assert (dense @ dense.T == np.eye(4, dtype=np.int64)).all()

    def test_U_examples(self):
        basis = four_point_basis()
        u = build_U(basis)
        assert column_of(u, basis, rational(1, 3)) == {rational(1, 3): UnitComplex.of(rational(1, 3))}
        uu = u @ u.H
        assert all(col == ((c, ONE_PHASE),) for c, col in enumerate(uu.columns))
        angles = [col[0][1].angle for col in u.columns]
        assert len(set(angles)) == len(angles)

    def test_generic_composition_rejects_collisions(self):
        basis = four_point_basis()
        ones = [((0, ONE_PHASE),)] * 4
        a = SparseOperator(basis, ones, np.ones(4, bool), np.ones(4, bool))
        b = SparseOperator(basis, [((0, ONE_PHASE), (1, ONE_PHASE))] + [()] * 3, np.ones(4, bool), np.ones(4, bool))
        with pytest.raises(ValueError):
            a @ b
        with pytest.raises(ValueError):
            a + a

    def test_generic_composition(self):
        basis = four_point_basis()
        d = diagonal(basis, [rational(1, 4), None, rational(1, 2), rational(0)])
        t1 = build_T(None, basis, 1)
        prod = d @ t1
        assert prod.column(0) == {2: UnitComplex.of(rational(1, 2))}
        assert prod.column(1) == {0: UnitComplex.of(rational(1, 4))}
        assert not prod.domain_mask[2]
        # T_2 sends 1/3 to 2/3, where the diagonal is zero
        assert (d @ build_T(None, basis, 2)).column(0) == {}

    def test_other_basis_refused(self):
        with pytest.raises(BasisMismatch):
            build_U(four_point_basis()) @ build_U(four_point_basis())


class TestMk:
    def test_M1_example(self):
        basis = four_point_basis()
        picks = {(1,): basis.index[rational(1, 6)], (2,): basis.index[rational(2, 3)]}
        m1 = build_Mk(None, basis, 1, chooser=lambda w, members, b: picks[w])
        for y, a in [(rational(1, 3), rational(1, 6)), (rational(1, 6), rational(1, 6)),
                     (rational(2, 3), rational(2, 3)), (rational(5, 6), rational(2, 3))]:
            assert column_of(m1, basis, y) == {y: UnitComplex.of(a)}

    def test_chooser_must_pick_member(self):
        basis = four_point_basis()
        with pytest.raises(DomainError):
            build_Mk(None, basis, 1, chooser=lambda w, members, b: 99)

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_diagonal_and_commutes_with_U(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, 0, 4, 3)
        u = build_U(basis)
        for k in range(1, 5):
            mk = build_Mk(None, basis, k)
            assert mk.is_diagonal()
            both, bad = (mk @ u).compare(u @ mk)
            assert both.all() and not bad.any()

    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_projections_agree_with_word_operators(self, name):
        """On core columns T_mu T_mu* is the projection M_k groups by."""
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, 0, 4, 4)
        k = 2
        words = build_Mk(None, basis, k).meta["word_of"]
        for mu in admissible_words(spec, k):
            t = word_operator(None, basis, mu)
            proj = t @ t.H
            for c in np.nonzero(proj.domain_mask)[0]:
                assert (proj.column(c) == {c: ONE_PHASE}) == (words[c] == mu)

    def test_unrepresented_words_reported(self):
        basis = four_point_basis()
        mk = build_Mk(None, basis, 3)
        assert mk.meta["unrepresented_words"]
        assert len(mk.meta["choices"]) + len(mk.meta["unrepresented_words"]) == 8

    def test_convergence_featured(self):
        basis = generalized_orbit(FEATURED, 0, 6, 4)
        rep = mk_convergence(None, basis, 6)
        assert rep.within_bound and rep.max_nonincreasing
        assert len(rep.test_vectors) == 10
        assert all(basis.core[i] for v in rep.test_vectors for i in v)

    def test_chosen_point_contributes_zero(self):
        basis = generalized_orbit(FEATURED, 0, 6, 4)
        i = default_test_vectors(basis, 1)[0]
        rep = mk_convergence(None, basis, 3, test_vectors=[i], chooser=lambda w, members, b: min(members))
        assert rep.rows[0].residuals[0] == 0  # index 0 is the smallest in its cylinder

    def test_bound_halves(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 4, 4)
        rep = mk_convergence(None, basis, 5)
        bounds = [r.bound[0] for r in rep.rows]
        for a, b in zip(bounds, bounds[1:]):
            assert abs(b - a / 2) < MP.mpf(10) ** -60

    def test_mixed_test_vector(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 4, 4)
        rep = mk_convergence(None, basis, 3, test_vectors=[{0: 1, 1: 1j}])
        assert rep.within_bound
        with pytest.raises(DomainError):
            mk_convergence(None, basis, 3, test_vectors=[10 ** 6])


class TestVerify:
    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_battery_relations(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, 0, 4, 3)
        rep = verify_relations(None, basis, "all", word_depth=2, halo=4)
        assert rep.passed, rep.to_json()["violations"][:3]
        for r in rep.relations:
            assert r.columns_checked + r.columns_censored == len(basis)
            assert r.columns_checked > 0

    def test_cuntz_doubling(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 4, 4)
        rep = verify_relations(None, basis, "cuntz_krieger", matrix=[[1, 1], [1, 1]], halo=2)
        ck = rep.relation("cuntz_krieger")
        assert ck.passed and ck.columns_checked > 0 and ck.evaluations >= 2 * ck.columns_checked

    def test_cuntz_uses_markov_matrix_by_default(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 3, 3)
        rep = verify_relations(None, basis, "cuntz_krieger", halo=2)
        assert rep.passed

    def test_cuntz_detects_wrong_matrix(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 3, 3)
        rep = verify_relations(None, basis, "cuntz_krieger", matrix=[[1, 0], [1, 1]], halo=2)
        assert not rep.passed
        assert rep.relation("cuntz_krieger").violation_count > 0

    def test_cuntz_needs_markov(self):
        basis = generalized_orbit(FEATURED, 0, 2, 2)
        with pytest.raises(DomainError):
            verify_relations(None, basis, "cuntz_krieger")

    def test_subshift_on_featured_depth3(self):
        basis = generalized_orbit(FEATURED, 0, 5, 3)
        rep = verify_relations(None, basis, "subshift", word_depth=3, halo=6)
        assert rep.passed
        assert rep.relation("subshift_product").columns_checked == len(basis)

    def test_halo_uncensors(self):
        basis = generalized_orbit(FEATURED, 0, 4, 3)
        bare = verify_relations(None, basis, "subshift", word_depth=2)
        wide = verify_relations(None, basis, "subshift", word_depth=2, halo=4)
        assert wide.relation("subshift_product").columns_checked > bare.relation("subshift_product").columns_checked

    def test_no_core_columns(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 0, 0)
        with pytest.raises(NoCoreColumns):
            verify_relations(None, basis, "subshift", word_depth=2)

    def test_halo_needs_orbit_basis(self):
        with pytest.raises(DomainError):
            extend_basis(four_point_basis(), 2)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            verify_relations(None, four_point_basis(), "bogus")

    def test_detects_broken_generator(self):
        """A perturbed basis table must produce violations, so the checks are not vacuous."""
        basis = generalized_orbit(DOUBLING, rational(1, 3), 3, 3)
        t = basis.tables()
        swapped = t.preimage_index.copy()
        live = np.nonzero(swapped[0] >= 0)[0]
        a, b = live[0], live[1]
        swapped[0, a], swapped[0, b] = swapped[0, b], swapped[0, a]
        swapped[1, a] = swapped[0, a]
        bad_tables = type(t)(t.branch_of, t.image_index, swapped)
        basis.__dict__["_tables"] = {id(basis.bs): (basis.bs, bad_tables)}
        rep = verify_relations(None, basis, "sum_to_identity")
        assert not rep.passed

    def test_report_json(self):
        basis = generalized_orbit(DOUBLING, rational(1, 3), 3, 3)
        doc = verify_relations(None, basis, "all", halo=2).to_json()
        assert doc["passed"] and doc["violations"] == []
        assert {r["name"] for r in doc["relations"]} == {
            "partial_isometry", "sum_to_identity", "subshift_product", "projection_commutation"}
        for r in doc["relations"]:
            assert {"columns_checked", "columns_censored", "violations"} <= set(r)


class TestRemarks:
    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_battery(self, name):
        spec = spec_of(*BATTERY[name])
        basis = generalized_orbit(spec, 0, 4, 3)
        rep = remark_checks(None, basis, halo=2)
        assert rep.consistent
        first, last = rep.branches[0], rep.branches[-1]
        for b in rep.branches[1:-1]:
            assert b.identity_on_core
        assert first.identity_on_core == (spec.alpha == 0)
        assert last.identity_on_core == last.image_full

    def test_featured_first_branch_fails(self):
        rep = remark_checks(None, generalized_orbit(FEATURED, 0, 4, 3), halo=2)
        first = rep.branches[0]
        assert not first.identity_on_core and first.witness == "0"
        assert rep.classical["first_branch"] == {"condition": "alpha == 0", "holds": False, "matches_image_test": True}
        assert rep.classical["last_branch"]["geometric_condition"] == "beta + alpha is an integer"

    def test_shifted_integer_slope(self):
        # integer slope with alpha > 0 adds a third branch whose image stops at alpha
        spec = spec_of("2", "1/4")
        rep = remark_checks(None, generalized_orbit(spec, 0, 4, 3), halo=2)
        last = rep.branches[-1]
        assert len(rep.branches) == 3
        assert rep.classical["last_branch"]["holds"] is False
        assert rep.classical["last_branch"]["geometric_holds"] is False
        assert last.image_full is False and not last.identity_on_core
        assert rep.branches[1].identity_on_core


class TestCertificates:
    @pytest.mark.parametrize("name", sorted(BATTERY))
    def test_orbit_bases_certified(self, name):
        spec = spec_of(*BATTERY[name])
        assert commutant_certificate(generalized_orbit(spec, 0, 4, 3)).certified

    def test_union_of_two_orbits_not_certified(self):
        a = generalized_orbit(DOUBLING, rational(1, 3), 3, 2)
        b = generalized_orbit(DOUBLING, rational(1, 5), 3, 2)
        rep = commutant_certificate(merge_bases(a, b))
        assert not rep.certified and rep.distinct_angles and rep.components == 2

    def test_single_point(self):
        rep = commutant_certificate(basis_from_points(DOUBLING, [rational(1, 7)]))
        assert rep.certified and rep.edges == 0

    def test_json(self):
        doc = commutant_certificate(four_point_basis()).to_json()
        assert doc["status"] == "certified" and doc["size"] == 4


class TestEquivalenceReport:
    def test_image(self):
        x = rational(2, 7)
        rep = equivalence_report(FEATURED, x, apply_map(FEATURED, x), 6)
        assert rep.verdict is Verdict.YES and rep.witness == (1, 0) and rep.witness_replayed
        assert rep.shared_angles

    def test_not_equivalent(self):
        rep = equivalence_report(DOUBLING, rational(1, 3), rational(1, 5), 16)
        assert rep.verdict is Verdict.NO and rep.cycles_disjoint
        cert = rep.certificate
        assert set(cert["x_cycle"]).isdisjoint(cert["y_cycle"])

    def test_reflexive(self):
        rep = equivalence_report(DOUBLING, rational(1, 7), rational(1, 7), 8)
        assert rep.witness == (0, 0) and rep.angles_x == rep.angles_y == len(rep.shared_angles)
        assert rep.to_json()["representations_equivalent"] == "yes"

    @settings(max_examples=15)
    @given(st.fractions(min_value=0, max_value=1, max_denominator=50).filter(lambda q: q < 1))
    def test_random_image_pairs(self, q):
        x = rational(q)
        rep = equivalence_report(DOUBLING, x, apply_map(DOUBLING, x), 10, truncation=(2, 1, 200))
        assert rep.verdict is Verdict.YES and rep.witness_replayed
        assert render(x) in {render(p) for p in generalized_orbit(DOUBLING, x, 2, 1).points}
