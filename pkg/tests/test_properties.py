"""Randomized properties of the whole pipeline."""

import math

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from icmaus import (
    EngineParams,
    build_alignments,
    compute_frequency_table,
    decode_code,
    new_pattern,
    parse_kb_text,
    pairwise,
    probability_report,
)
from icmaus.encoding import matched_region
from icmaus.errors import KBValidationError
from icmaus.scenarios import corpus_paths, load_scenario
from oracles import brute_best_cd
from workloads import EXHAUSTIVE, random_kb, random_new, scaling_in_m, tiny_instance

ALPHABET = "abcde"

tiny_patterns = st.lists(
    st.tuples(st.text(ALPHABET, min_size=1, max_size=5), st.integers(1, 50)),
    min_size=1, max_size=5,
)
tiny_new = st.text(ALPHABET, min_size=1, max_size=5)


def make_kb(rows):
    seen, lines = set(), []
    for symbols, f in rows:
        if symbols not in seen:
            seen.add(symbols)
            lines.append(f"{' '.join(symbols)} ({f})")
    return parse_kb_text("\n".join(lines))


def signature(found):
    return [(sa.alignment.key(), sa.alignment.provenance, round(sa.CD, 9)) for sa in found]


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(tiny_patterns, tiny_new)
def test_decode_inverts_encode(rows, new):
    try:
        kb = make_kb(rows)
    except KBValidationError:
        return
    for sa in build_alignments(new_pattern(list(new)), kb):
        assert decode_code(sa.code, kb) == matched_region(sa.alignment)


@settings(max_examples=60, deadline=None)
@given(tiny_patterns, tiny_new)
def test_relative_probabilities_sum_to_one(rows, new):
    try:
        kb = make_kb(rows)
    except KBValidationError:
        return
    found = build_alignments(new_pattern(list(new)), kb)
    if not found:
        return
    rs, report = probability_report(found, kb)
    assert math.fsum(report.p_rel) == pytest.approx(1.0, abs=1e-9)
    assert all(0.0 <= p <= 1.0 + 1e-12 for p in report.symbols.values())


@pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.stem)
def test_corpus_reference_sets_normalized(path):
    s = load_scenario(path)
    found = build_alignments(s.new, s.kb, s.engine_params())
    if not found:
        pytest.skip("scenario forms no alignment")
    _, report = probability_report(found, s.kb, s.focus, refine=s.refine)
    assert math.fsum(report.p_rel) == pytest.approx(1.0, abs=1e-9)
    if report.refined is not None:
        assert math.fsum(report.refined) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(60, 80))
def test_engine_matches_brute_force(seed):
    kb, new = tiny_instance(seed)
    table = compute_frequency_table(kb, new)
    expected = brute_best_cd(new, kb, table)
    found = build_alignments(new, kb, EXHAUSTIVE)
    if expected is None:
        assert not found
    else:
        assert found[0].CD == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_repeated_runs_agree(seed):
    kb, symbols = random_kb(seed)
    new = random_new(seed, symbols, 16)
    first = signature(build_alignments(new, kb))
    for _ in range(3):
        assert signature(build_alignments(new, kb)) == first


@pytest.mark.parametrize("seed", range(3))
def test_worker_count_does_not_matter(seed):
    kb, symbols = random_kb(seed)
    new = random_new(seed, symbols, 16)
    one = build_alignments(new, kb, EngineParams(workers=1))
    four = build_alignments(new, kb, EngineParams(workers=4))
    assert signature(one) == signature(four)


@pytest.mark.skipif("c" not in pairwise.available_backends(), reason="compiled kernel not built")
@pytest.mark.parametrize("seed", range(3))
def test_backends_give_same_alignments(seed):
    kb, symbols = random_kb(seed)
    new = random_new(seed, symbols, 24)
    before = pairwise.get_backend()
    try:
        pairwise.set_backend("c")
        fast = signature(build_alignments(new, kb))
        pairwise.set_backend("python")
        slow = signature(build_alignments(new, kb))
    finally:
        pairwise.set_backend(before)
    assert fast == slow


def test_build_time_grows_linearly_in_kb_size():
    # small KBs barely match New at all, so start where matches are common
    medians, slope = scaling_in_m((16, 32, 64, 128), seeds=3)
    assert slope <= 1.1, f"slope {slope:.2f} over medians {medians}"
