"""Figure rendering for the analyze and search report paths.

Figures land next to the delimited output as PNGs. The Agg backend plus a
pinned metadata block keeps the bytes reproducible run to run.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_RC = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
}

_PNG_META = {"Software": "covercraft"}


def _save(fig, path):
    fig.savefig(path, dpi=130, bbox_inches="tight", metadata=_PNG_META)
    plt.close(fig)
    return str(path)


def diagnostics_figures(diag, outdir, stem="diagnostics"):
    """Render one figure per diagnostics family; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    xs = [row.x for row in diag.rows]

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(xs, [r.mertens.value for r in diag.rows], "o-", label="sum of 1/p")
        ax.plot(xs, [r.mertens.loglog for r in diag.rows], "s--", label="log log x")
        ax.plot(xs, [r.mertens.loglog + 1 for r in diag.rows], "s--",
                label="log log x + 1")
        ax.set_xscale("log")
        ax.set_xlabel("x")
        ax.set_ylabel("reciprocal prime sum")
        ax.legend()
        written.append(_save(fig, outdir / f"{stem}_mertens.png"))

        pi_rows = [r for r in diag.rows if r.pi_bounds is not None]
        if pi_rows:
            fig, ax = plt.subplots()
            pxs = [r.x for r in pi_rows]
            ax.plot(pxs, [r.pi_bounds.pi for r in pi_rows], "o-", label="pi(x)")
            ax.plot(pxs, [r.pi_bounds.lower for r in pi_rows], "--", label="lower bound")
            ax.plot(pxs, [r.pi_bounds.upper for r in pi_rows], "--", label="upper bound")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("x")
            ax.set_ylabel("prime count")
            ax.legend()
            written.append(_save(fig, outdir / f"{stem}_pi_bounds.png"))

        if diag.pair_m_values:
            fig, ax = plt.subplots()
            for m in diag.pair_m_values:
                vals = []
                for row in diag.rows:
                    ps = next(p for p in row.pair_sums if p.m == m)
                    vals.append(ps.value)
                ax.plot(xs, vals, "o-", label=f"m = {m}")
            ax.set_xscale("log")
            ax.set_xlabel("x")
            ax.set_ylabel("sum of 1/p over p with m*p + 1 prime")
            ax.legend()
            written.append(_save(fig, outdir / f"{stem}_pair_sums.png"))

        hit_rows = [r for r in diag.rows if r.hit is not None and r.hit.ratio_log_sq]
        if hit_rows:
            fig, ax = plt.subplots()
            hxs = [r.x for r in hit_rows]
            ax.plot(hxs, [r.hit.value for r in hit_rows], "o-", label="hit sum")
            ax.plot(hxs, [r.hit.ratio_log_sq for r in hit_rows], "s--",
                    label="hit sum / log^2 x")
            ax.set_xscale("log")
            ax.set_xlabel("x")
            ax.legend()
            written.append(_save(fig, outdir / f"{stem}_hit_growth.png"))

    return written


def report_figure(report, path):
    """Exception tallies by exponent, annotated with the headline counts."""
    by_i = {}
    for (a, i, _triple), counts in report.tallies.items():
        slot = by_i.setdefault(i, [0, 0])
        slot[0] += counts.get("prime_exception", 0)
        slot[1] += counts.get("unit_or_zero_exception", 0)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if by_i:
            ivals = sorted(by_i)
            prime_counts = [by_i[i][0] for i in ivals]
            unit_counts = [by_i[i][1] for i in ivals]
            ax.bar(ivals, prime_counts, label="prime value")
            ax.bar(ivals, unit_counts, bottom=prime_counts, label="unit or zero")
            ax.set_xlabel("exponent i")
            ax.set_ylabel("exception count")
            ax.legend()
        else:
            ax.text(0.5, 0.5, "no exceptions recorded", ha="center", va="center",
                    transform=ax.transAxes)
            ax.set_xticks([])
            ax.set_yticks([])
        ax.set_title(
            f"candidates {report.q_n}, survivors {report.q}, "
            f"window [{report.window.n_low}, {report.window.n_high}]"
        )
        return _save(fig, Path(path))
