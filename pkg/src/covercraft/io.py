"""Versioned document schemas and file I/O.

Big integers travel as decimal strings everywhere; every persisted document
carries a schema version and the tool version, and loaders reject unknown
major versions. Covering systems are re-validated on load before use.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from . import SCHEMA_VERSION, __version__
from .analytics import SieveDiagnostics
from .cover import (
    CoverEntry,
    CoveringSystem,
    FormTriple,
    PairMining,
    PrimePair,
    TargetConfig,
    verify_covering_system,
)
from .errors import SchemaError, VerificationFailure
from .search import SearchReport, SearchWindow


def canonical_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def document_digest(doc) -> str:
    return hashlib.sha256(canonical_dumps(doc).encode()).hexdigest()


def _envelope(kind: str) -> dict:
    return {"version": SCHEMA_VERSION, "tool_version": __version__, "kind": kind}


def check_envelope(doc, kind: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"expected a JSON object for {kind}")
    got_kind = doc.get("kind")
    if got_kind != kind:
        raise SchemaError(f"expected kind={kind}, found {got_kind!r}")
    version = str(doc.get("version", ""))
    major = version.split(".", 1)[0]
    if major != SCHEMA_VERSION.split(".", 1)[0]:
        raise SchemaError(f"unsupported {kind} schema version {version!r}")


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# -- prime pairs -------------------------------------------------------------

def mining_to_doc(minings: list[PairMining], params: dict) -> dict:
    doc = _envelope("prime-pairs")
    doc["params"] = dict(params)
    doc["pairs"] = [
        {"a": pr.a, "p": pr.p, "q": str(pr.q)}
        for m in minings
        for pr in m.pairs
    ]
    doc["skipped"] = [
        {"a": r.a, "p": r.p, "reason": r.skip_reason}
        for m in minings
        for r in m.skipped
    ]
    doc["anchors"] = [
        {
            "a": r.a,
            "p": r.p,
            "factors": None if r.factors is None else [[str(q), e] for q, e in r.factors],
            "accepted": [str(q) for q in r.accepted],
            "rejected": [[str(q), reason] for q, reason in r.rejected],
            "skip_reason": r.skip_reason,
        }
        for m in minings
        for r in m.records
    ]
    return doc


def pairs_from_doc(doc) -> list[PrimePair]:
    check_envelope(doc, "prime-pairs")
    return [PrimePair(int(e["a"]), int(e["p"]), int(e["q"])) for e in doc["pairs"]]


# -- covering system ---------------------------------------------------------

def system_to_doc(system: CoveringSystem) -> dict:
    doc = _envelope("covering-system")
    cfg = system.config
    doc["K"] = cfg.k_max
    doc["M"] = cfg.m_bound
    doc["L_N"] = list(cfg.offsets)
    doc["entries"] = [
        {
            "a": e.a,
            "j": e.triple.j,
            "k": e.triple.k,
            "l": e.triple.l,
            "p": e.pair.p,
            "q": str(e.pair.q),
            "I": e.residue_i,
        }
        for e in system.entries
    ]
    doc["W"] = str(system.modulus)
    doc["b"] = str(system.residue)
    return doc


def system_from_doc(doc, revalidate: bool = True) -> CoveringSystem:
    check_envelope(doc, "covering-system")
    try:
        cfg = TargetConfig(
            k_max=int(doc["K"]), offsets=tuple(int(l) for l in doc["L_N"]),
            m_bound=int(doc["M"]),
        )
        entries = [
            CoverEntry(
                a=int(e["a"]),
                triple=FormTriple(int(e["j"]), int(e["k"]), int(e["l"])),
                pair=PrimePair(int(e["a"]), int(e["p"]), int(e["q"])),
                residue_i=int(e["I"]),
            )
            for e in doc["entries"]
        ]
        system = CoveringSystem(cfg, entries, int(doc["W"]), int(doc["b"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"malformed covering-system document: {exc!r}") from exc
    if revalidate:
        report = verify_covering_system(system, samples=32)
        if not report.ok:
            lines = "; ".join(f"{n}: {d}" for n, d in report.failures[:8])
            raise VerificationFailure(f"covering system fails validation on load: {lines}")
    return system


def system_digest(system: CoveringSystem) -> str:
    return document_digest(system_to_doc(system))


# -- search report (JSON lines) ----------------------------------------------

def report_to_lines(report: SearchReport, config_doc: dict) -> list[str]:
    header = _envelope("search-report")
    header["record"] = "header"
    header["config"] = config_doc
    header["window"] = {
        "N": str(report.window.n_low),
        "upper": str(report.window.n_high),
        "i_max": report.window.i_max,
    }
    header["system_digest"] = report.system_digest
    lines = [canonical_dumps(header)]
    for cand in report.candidates:
        lines.append(
            canonical_dumps(
                {
                    "record": "candidate",
                    "m": str(cand.m),
                    "survivor": cand.survivor,
                    "counts": dict(sorted(cand.counts.items())),
                    "exceptions": [
                        {"a": a, "i": i, "j": t.j, "k": t.k, "l": t.l, "status": s}
                        for a, i, t, s in cand.exception_slots
                    ],
                }
            )
        )
    trailer = {
        "record": "trailer",
        "Q_N": report.q_n,
        "Q": report.q,
        "survivors": [str(m) for m in report.survivors],
        "tallies": [
            {
                "a": a, "i": i, "j": t.j, "k": t.k, "l": t.l,
                "counts": dict(sorted(counts.items())),
            }
            for (a, i, t), counts in sorted(
                report.tallies.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])
            )
        ],
        "probabilistic_primality": report.probabilistic_primality,
        "wall_time_s": round(report.wall_time_s, 6),
    }
    lines.append(canonical_dumps(trailer))
    return lines


def write_report(path, report: SearchReport, config_doc: dict) -> None:
    Path(path).write_text("\n".join(report_to_lines(report, config_doc)) + "\n")


def read_report_lines(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line]


# -- oracle survivors ----------------------------------------------------------

def oracle_to_doc(window: SearchWindow, cfg: TargetConfig, survivors: list[int]) -> dict:
    doc = _envelope("oracle-survivors")
    doc["window"] = {
        "N": str(window.n_low), "upper": str(window.n_high), "i_max": window.i_max,
    }
    doc["K"] = cfg.k_max
    doc["L_N"] = list(cfg.offsets)
    doc["survivors"] = [str(m) for m in survivors]
    return doc


def oracle_from_doc(doc) -> list[int]:
    check_envelope(doc, "oracle-survivors")
    return [int(s) for s in doc["survivors"]]


# -- diagnostics ---------------------------------------------------------------

def diagnostics_to_doc(diag: SieveDiagnostics) -> dict:
    doc = _envelope("sieve-diagnostics")
    doc["pair_m_values"] = list(diag.pair_m_values)
    if diag.hit_params is None:
        doc["hit_params"] = None
    else:
        k_max, a, j, l, cutoff = diag.hit_params
        doc["hit_params"] = {"K": k_max, "a": a, "j": j, "l": l, "cutoff": cutoff}
    rows = []
    for row in diag.rows:
        out = {
            "x": str(row.x),
            "mertens_sum": row.mertens.value,
            "loglog_x": row.mertens.loglog,
            "mertens_ok": row.mertens.ok,
            "pair_sums": {
                str(ps.m): {"value": ps.value, "decades": [[str(c), v] for c, v in ps.decades]}
                for ps in row.pair_sums
            },
        }
        if row.pi_bounds is not None:
            out["pi"] = row.pi_bounds.pi
            out["pi_lower"] = row.pi_bounds.lower
            out["pi_upper"] = row.pi_bounds.upper
            out["pi_ok"] = row.pi_bounds.ok
        if row.hit is not None:
            out["hit_sum"] = row.hit.value
            out["hit_ratio_log_sq"] = row.hit.ratio_log_sq
            out["hit_terms"] = row.hit.terms
        rows.append(out)
    doc["rows"] = rows
    return doc


def write_diagnostics_csv(path, diag: SieveDiagnostics) -> None:
    """Flat delimited companion to the JSON table, one row per grid point."""
    columns = ["x", "mertens_sum", "loglog_x", "mertens_ok", "pi", "pi_lower",
               "pi_upper", "pi_ok"]
    columns += [f"pair_sum_m{m}" for m in diag.pair_m_values]
    columns += ["hit_sum", "hit_ratio_log_sq"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in diag.rows:
            rec = [row.x, repr(row.mertens.value), repr(row.mertens.loglog),
                   row.mertens.ok]
            if row.pi_bounds is None:
                rec += ["", "", "", ""]
            else:
                rec += [row.pi_bounds.pi, repr(row.pi_bounds.lower),
                        repr(row.pi_bounds.upper), row.pi_bounds.ok]
            rec += [repr(ps.value) for ps in row.pair_sums]
            if row.hit is None:
                rec += ["", ""]
            else:
                rec += [repr(row.hit.value),
                        "" if row.hit.ratio_log_sq is None else repr(row.hit.ratio_log_sq)]
            writer.writerow(rec)
