"""Figure rendering for the report path.

Every renderer takes the already-computed payload, writes PNG files next to
the delimited outputs in ``out_dir``, and returns the list of paths written.
Rendering is headless (Agg) and optional; nothing here feeds back into the
checks themselves.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# log-scale axes cannot show exact zeros, so floor residuals here
_FLOOR = 1e-17

_VERDICT_COLORS = {"pass": "#2a7e43", "fail": "#b03a2e", "refused": "#8a6d3b",
                   "skipped": "#7f8c8d"}


def _finite(x) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        return _FLOOR
    if not np.isfinite(v):
        return _FLOOR
    return max(v, _FLOOR)


def render_report_figures(report: dict, out_dir: str) -> list[str]:
    """Residual overview for a verification report: one panel of worst
    residuals per suite against the two tolerance tiers, one panel of verdict
    counts."""
    checks = report.get("body", {}).get("checks", [])
    if not checks:
        return []
    suites = sorted({c["suite"] for c in checks})
    worst = {s: _FLOOR for s in suites}
    counts = {s: {v: 0 for v in _VERDICT_COLORS} for s in suites}
    for c in checks:
        s = c["suite"]
        counts[s][c.get("verdict", "fail")] = counts[s].get(c.get("verdict", "fail"), 0) + 1
        if c.get("verdict") in ("pass", "fail"):
            worst[s] = max(worst[s], _finite(c.get("residual")))

    cfg = report.get("body", {}).get("config", {})
    tol_e = float(cfg.get("tol-e", 1e-10))
    tol_c = float(cfg.get("tol-c", 1e-6))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    xs = np.arange(len(suites))
    ax1.bar(xs, [worst[s] for s in suites], color="#3a6ea5", width=0.6)
    ax1.axhline(tol_e, color="#2a7e43", ls="--", lw=1, label=f"tier E ({tol_e:g})")
    ax1.axhline(tol_c, color="#b03a2e", ls="--", lw=1, label=f"tier C ({tol_c:g})")
    ax1.set_yscale("log")
    ax1.set_xticks(xs)
    ax1.set_xticklabels(suites, rotation=20)
    ax1.set_ylabel("worst residual")
    ax1.set_title("worst residual by suite")
    ax1.legend(fontsize=8)

    bottom = np.zeros(len(suites))
    for verdict, color in _VERDICT_COLORS.items():
        vals = np.array([counts[s].get(verdict, 0) for s in suites], dtype=float)
        if vals.any():
            ax2.bar(xs, vals, bottom=bottom, color=color, width=0.6, label=verdict)
        bottom += vals
    ax2.set_xticks(xs)
    ax2.set_xticklabels(suites, rotation=20)
    ax2.set_ylabel("check units")
    ax2.set_title("verdicts by suite")
    ax2.legend(fontsize=8)

    fig.tight_layout()
    path = os.path.join(out_dir, "report_residuals.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_spectrum_figures(rows: list[dict], out_dir: str) -> list[str]:
    """Predicted-versus-computed scatter plus the distribution of the
    per-row absolute differences."""
    if not rows:
        return []
    pred = np.array([_finite(r["predicted"]) for r in rows])
    comp = np.array([_finite(r["computed"]) for r in rows])
    diff = np.array([_finite(r["abs_diff"]) for r in rows])
    ok = np.array([bool(r["ok"]) for r in rows])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    lo = 0.5 * min(pred.min(), comp.min())
    hi = 2.0 * max(pred.max(), comp.max())
    ax1.plot([lo, hi], [lo, hi], color="#999999", lw=1, zorder=1)
    ax1.scatter(pred[ok], comp[ok], s=14, color="#2a7e43", label="matched", zorder=2)
    if (~ok).any():
        ax1.scatter(pred[~ok], comp[~ok], s=20, color="#b03a2e", marker="x",
                    label="mismatched", zorder=3)
    ax1.set_xscale("log")
    ax1.set_yscale("log")
    ax1.set_xlabel("predicted eigenvalue")
    ax1.set_ylabel("nearest computed eigenvalue")
    ax1.set_title(f"spectral match ({len(rows)} rows)")
    ax1.legend(fontsize=8)

    bins = np.logspace(np.log10(_FLOOR), max(np.log10(diff.max()), -15) + 1, 40)
    ax2.hist(diff, bins=bins, color="#3a6ea5")
    ax2.set_xscale("log")
    ax2.set_xlabel("|predicted - computed|")
    ax2.set_ylabel("rows")
    ax2.set_title("match residuals")

    fig.tight_layout()
    path = os.path.join(out_dir, "spectrum.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_convergence_figures(study: dict, out_dir: str) -> list[str]:
    """Residual against truncation degree, one line per check and model point."""
    degrees = study.get("degrees", [])
    records = [r for r in study.get("records", []) if r.get("residuals")]
    if not records or not degrees:
        return []
    fig, ax = plt.subplots(figsize=(7.5, 4.6))
    for rec in records:
        ys = [_finite(v) for v in rec["residuals"]]
        label = f"{rec['id']} (n={rec['n']}, lam={rec['lambda']:g})"
        style = "-o" if rec.get("verdict") == "pass" else "-x"
        ax.plot(degrees[: len(ys)], ys, style, ms=4, lw=1.2, label=label)
    ax.set_yscale("log")
    ax.set_xticks(degrees)
    ax.set_xlabel("truncation degree N")
    ax.set_ylabel("worst residual")
    ax.set_title("residual decay under truncation refinement")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    path = os.path.join(out_dir, "convergence.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_certificate_figures(bundle: dict, out_dir: str) -> list[str]:
    """Worst constants of the built-in membership certificates, with the
    starred lower-bound margins on a second panel."""
    names, consts, passed = [], [], []
    stars, star_names = [], []
    for rep in bundle.get("library", []):
        env = rep.get("env", {})
        tag = f"n={env.get('n', '?')}"
        for entry in rep.get("entries", []):
            if entry.get("skipped"):
                continue
            cert = entry.get("certificate", {})
            names.append(f"{entry['name']} ({tag})")
            consts.append(_finite(cert.get("worst_constant")))
            passed.append(bool(entry.get("passed")))
            smin = cert.get("star_min")
            if smin is not None:
                star_names.append(f"{entry['name']} ({tag})")
                stars.append(_finite(smin))
    if not names:
        return []

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, max(4.2, 0.22 * len(names))))
    ys = np.arange(len(names))
    colors = ["#2a7e43" if p else "#b03a2e" for p in passed]
    ax1.barh(ys, consts, color=colors, height=0.7)
    ax1.set_yticks(ys)
    ax1.set_yticklabels(names, fontsize=6)
    ax1.set_xscale("log")
    ax1.set_xlabel("worst derivative constant")
    ax1.set_title("membership certificates")
    ax1.invert_yaxis()

    if stars:
        ys2 = np.arange(len(star_names))
        ax2.barh(ys2, stars, color="#3a6ea5", height=0.7)
        ax2.set_yticks(ys2)
        ax2.set_yticklabels(star_names, fontsize=6)
        ax2.set_xscale("log")
        ax2.set_xlabel("lower-bound margin")
        ax2.set_title("starred lower bounds")
        ax2.invert_yaxis()
    else:
        ax2.axis("off")

    fig.tight_layout()
    path = os.path.join(out_dir, "certificates.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
