import pytest

from tlcells.cells import build_preorder
from tlcells.coxeter import build_graph, element, group_of
from tlcells.hecke import cs_times_clprime
from tlcells.laurent import ONE
from tlcells.verify import (CONDITIONS, Caches, EquivalenceFault, Verdict, check_condition,
                            corollary_table, d_remark_check, fc_union_of_cells,
                            intersection_rule_B, verify_equivalence)

D4 = build_graph("D", 4)


@pytest.fixture(scope="module")
def d4():
    return Caches(D4)


def test_verdict_needs_witness_on_failure():
    with pytest.raises(ValueError):
        Verdict("vi", False)
    rec = Verdict("vi", True).to_record()
    assert rec == {"condition": "vi", "holds": True, "witness": None, "stats": {}}


def test_check_condition_examples(d4):
    assert check_condition(build_graph("B", 3), "vi").holds
    v = check_condition(D4, "vi", d4)
    assert not v.holds
    assert v.witness["elements"] == ["2.3.4.3.1.2.3", "1.2.4.3"]
    assert v.witness["generator"] == 1
    i25 = build_graph("I2", 5)
    cx = Caches(i25)
    assert check_condition(i25, "iii", cx).holds
    g = group_of(i25)
    assert [w for w in range(g.order) if not cx.theta_kl[w]] == [g.longest]
    with pytest.raises(ValueError):
        check_condition(D4, "ix", d4)
    with pytest.raises(ValueError):
        check_condition(build_graph("A", 3), "vi", d4)


def test_d4_witness_is_rechecked_independently(d4):
    v = check_condition(D4, "vi", d4)
    w, x = (element(D4, tuple(map(int, t.split(".")))) for t in v.witness["elements"])
    assert cs_times_clprime(v.witness["generator"], w, d4.kl)[x] == ONE
    pre = build_preorder(D4, "left", d4.kl)
    assert pre.leq(x, w) and pre.leq(w, x)


@pytest.mark.parametrize("tag,n,expect", [("A", 3, True), ("B", 2, True), ("B", 3, True),
                                          ("D", 4, False), ("I2", 6, True), ("H", 3, True)])
def test_equivalence(tag, n, expect):
    graph = build_graph(tag, n)
    verdicts = verify_equivalence(graph)
    assert [v.condition_id for v in verdicts] == list(CONDITIONS)
    assert {v.holds for v in verdicts} == {expect}
    for v in verdicts:
        assert v.stats["graph"] == graph.name
        if not v.holds:
            assert v.witness


def test_equivalence_fault_reports_disagreement():
    fault = EquivalenceFault(D4, [Verdict("i", True), Verdict("vi", False, {"x": 1})])
    assert "i=True" in str(fault) and "vi=False" in str(fault)


def test_corollary_rows():
    rows = corollary_table([build_graph(t, n) for t, n in [("A", 2), ("B", 3), ("D", 4), ("I2", 7)]])
    assert [(r["graph"], r["fc_union_of_two_sided_cells"], r["contains_d4"]) for r in rows] == \
        [("A2", True, False), ("B3", True, False), ("D4", False, True), ("I2(7)", True, False)]
    assert all(r["agrees"] for r in rows)


def test_d_remark(d4):
    assert d_remark_check(4, caches=d4).holds
    assert d_remark_check(graph=build_graph("A", 3)).holds
    assert d_remark_check(graph=build_graph("B", 3)).holds
    with pytest.raises(ValueError):
        d_remark_check(5)


def test_d4_image_count_exceeds_rank(d4):
    nonzero = sum(1 for u in d4.theta_kl if u)
    assert len(d4.algebra.fc_list) == 48 and nonzero > 48
    assert not fc_union_of_cells(d4)


@pytest.mark.parametrize("n", [2, 3])
def test_intersection_rule(n):
    v = intersection_rule_B(n)
    assert v.holds and v.stats["intersections"] > 0
    with pytest.raises(ValueError):
        intersection_rule_B(5)


def test_cache_dir_round_trip(tmp_path):
    graph = build_graph("B", 3)
    cold = Caches(graph, tmp_path)
    a = [check_condition(graph, c, cold).holds for c in CONDITIONS]
    path = tmp_path / "B3.klc"
    text = path.read_text()
    warm = Caches(graph, tmp_path)
    assert warm.kl.computed == warm.group.order
    assert [check_condition(graph, c, warm).holds for c in CONDITIONS] == a
    assert path.read_text() == text
