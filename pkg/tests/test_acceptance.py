"""Acceptance criteria 1-9, one pass/fail line each."""

import time

import pytest

from ilctiling.algebra import (
    IntPoly,
    build_M,
    char_poly,
    conjugate_mu2,
    h_poly,
    minimal_poly,
    q_poly,
    v_dot_y,
)
from ilctiling.exactring import identity_report, index_set, mu_float, s_value
from ilctiling.ilc import (
    N13_ABS,
    N13_T,
    N13_W,
    certify_monotone,
    make_config,
    printed_consistency,
    project2,
    replay_trace,
    seed_w1,
    subset_sum_bound,
)
from reference_values import SUBSET_SUM_EXTREMES, MINPOLY, MU2, V_DOT_Y

NS = (13, 17, 21)


@pytest.fixture
def report(capsys):
    def emit(num: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail

    return emit


def test_criterion_1_ring_identities(report):
    t = time.perf_counter()
    reps = [identity_report(n) for n in NS]
    dt = time.perf_counter() - t
    ok = all(r["ok"] for r in reps) and dt < 1.0
    report(1, ok, f"odd/even sums and mu*s_k expansions exact for n=13,17,21 in {dt:.3f}s")


def test_criterion_2_minimal_polynomials(report):
    t = time.perf_counter()
    ok = True
    for n in NS:
        p = char_poly(build_M(n))
        g = minimal_poly(n)
        ok &= p.coeffs == (-(IntPoly((-1, 1)) * q_poly(n))).coeffs
        ok &= g.coeffs == MINPOLY[n]
        ok &= abs(g(mu_float(n))) < 1e-9
        ok &= float(f"{conjugate_mu2(n):.6g}") == MU2[n]
    dt = time.perf_counter() - t
    ok &= dt < 1.0
    report(2, bool(ok), f"p = -(x-1)q, g_n and mu_(n,2) match the reference minimal polynomials ({dt:.3f}s)")


def test_criterion_3_edge_length_polynomials(report):
    worst_h, worst_v, count = 0.0, 0.0, 0
    for n in NS:
        vy = v_dot_y(n)
        for j in index_set(n):
            worst_h = max(worst_h, abs(h_poly(n, j)(mu_float(n)) - float(s_value(n, j))))
            worst_v = max(worst_v, abs(vy[j] - V_DOT_Y[n][j]))
            count += 1
    ok = count == 27 and worst_h < 1e-9 and worst_v < 1e-9
    report(3, ok, f"{count} polynomials, max |h(mu)-s| = {worst_h:.1e}, max v.y error = {worst_v:.1e}")


def test_criterion_4_subset_sums(report):
    t = time.perf_counter()
    errs = []
    for n in NS:
        hi, lo = subset_sum_bound(n)
        errs += [abs(hi - SUBSET_SUM_EXTREMES[n][0]), abs(lo - SUBSET_SUM_EXTREMES[n][1])]
    dt = time.perf_counter() - t
    ok = max(errs) < 1e-12 and dt < 1.0
    report(4, ok, f"max deviation {max(errs):.1e} from the reference extremes ({dt:.3f}s)")


def test_criterion_5_n13_replay(report):
    tr = replay_trace(13, N13_T)
    ws = [tuple(int(x) for x in r.w) for r in tr.rows]
    err = max(abs(abs(r.wproj) - a) for r, a in zip(tr.rows, N13_ABS))
    r5 = tr.rows[4].ratio
    th = tr.cfg.threshold
    ok = (
        ws == N13_W
        and err < 1e-6
        and tr.first_criterion == 5
        and abs(r5 - 3.2312) < 1e-4
        and abs(th - 2.4389) < 1e-4
        and certify_monotone(tr.cfg, tr, 5)
        and abs(make_config(17).threshold - 1.20909519021763) < 1e-4
        and abs(make_config(21).threshold - 2.7131) < 1e-4
    )
    report(5, ok, f"8 rows exact, |w'| error {err:.1e}, first criterion r={tr.first_criterion} "
                  f"(ratio {r5:.4f} > {th:.4f}), monotone from r=5")


def test_criterion_6_n17_n21_partial(report):
    s17 = abs(project2(17, seed_w1(17)))
    s21 = abs(project2(21, seed_w1(21)))
    rows = printed_consistency(17) + printed_consistency(21)
    ok = abs(s17 - 0.061999291) < 1e-6 and abs(s21 - 0.244876744) < 1e-6 and all(r["consistent"] for r in rows)
    report(6, ok, f"seed projections {s17:.9f}, {s21:.9f}; {len(rows)} printed rows consistent "
                  "(full replay impossible: u_r unavailable)")


@pytest.mark.slow
def test_criterion_7_ksk_pipeline(report):
    from ilctiling.kskdissect import (
        Arrangement,
        RuleSearchError,
        balance_check,
        boundary_tiles,
        build_rule,
        ksk_census,
        stored_arrangements,
        validate_rule,
    )

    lines, ok = [], True
    for n in NS:
        t = time.perf_counter()
        try:
            rule = build_rule(n)
            failures = {}
        except RuleSearchError as exc:
            rule, failures = exc.partial, exc.failures
        dt = time.perf_counter() - t
        rep = validate_rule(rule)
        balanced = all(
            balance_check(c)
            for k, info in rule.provenance.items()
            for c in boundary_tiles(n, k, Arrangement.from_json(info["arrangement"]))[1]
        )
        area = max(e.get("area_rel_error", 0.0) for e in rep["per_k"].values())
        stored = stored_arrangements(n)
        same = all(stored.get(k) is not None and stored[k].to_json() == info["arrangement"]
                   for k, info in rule.provenance.items())
        good = rep["ok"] and balanced and area < 1e-8 and dt < 600 and same
        if failures:
            census = {c["k"]: c["min_nonconvex_found"] for c in ksk_census(n) if c["k"] in failures}
            lines.append(f"n={n}: k={sorted(failures)} unresolved, census {census}")
            good = False
        cuts = sorted(k for k, info in rule.provenance.items() if info["cuts"])
        lines.append(f"n={n}: {len(rule.tiles)} prototiles valid={rep['ok']} balanced={balanced} "
                     f"area err {area:.1e} cuts at k={cuts} {dt:.0f}s reproduces stored={same}")
        ok &= good
    report(7, bool(ok), "; ".join(lines))


@pytest.mark.slow
def test_criterion_8_ilc_probe(report, rule13):
    from ilctiling.engine import supertile
    from ilctiling.ilc import derive_t_sequence
    from ilctiling.tiles import edge_type_census

    counts = [len(edge_type_census(supertile(rule13, 1, r))) for r in (1, 2, 3, 4)]
    census_ok = all(a < b for a, b in zip(counts, counts[1:]))
    d = derive_t_sequence(rule13, 13, r_max=30)
    r0 = d.trace.first_criterion
    derive_ok = r0 is not None and r0 <= 30 and certify_monotone(d.trace.cfg, d.trace, r0)
    report(8, census_ok or derive_ok,
           f"edge types at orders 1-4: {counts} (strictly increasing: {census_ok}); "
           f"derive mode criterion at r={r0}, monotone: {derive_ok}")


@pytest.mark.slow
def test_criterion_9_symmetry(report, rule13):
    from ilctiling.symmetry import adjust_orientations, centred, check_nesting, find_nesting_rotation, symmetry_group

    rule2, rep, flips = adjust_orientations(rule13)
    if rep.ok:
        final = rep.stages[-1]
        V = centred(final.patch, final.center)
        order = len(symmetry_group(V))
        r = find_nesting_rotation(rule2, V)
        nest = check_nesting(rule2, V, 1 if r is None else r, 3)
        ok = order == 26 and nest.ok
        report(9, ok, f"seed {final.name} with symmetry order {order}, nesting for 3 steps: {nest.ok}")
    else:
        structured = rep.failed_stage is not None and bool(rep.reason)
        report(9, structured, f"structured failure after flips {flips}: stage {rep.failed_stage} ({rep.reason})")
