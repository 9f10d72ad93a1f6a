"""Rendering of compliance reports: delimited tables and figures.

The JSON report is the canonical artifact; this module derives the
human-facing views from it — TSV tables for spreadsheets and matplotlib
figures for a quick visual audit.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STATUS_COLORS = {
    "Satisfied": "#2e7d32",
    "Compliant": "#2e7d32",
    "Violated": "#c62828",
    "NotApplicable": "#9e9e9e",
}


def requirements_tsv(report: dict) -> str:
    lines = ["req_id\tstatus\tbest_segment\tscore\tsimilarity\tmatched_roles\tmissing_roles"]
    for req in report["requirements"]:
        best = req.get("best")
        if best is None:
            lines.append(f"{req['req_id']}\t{req['status']}\t-\t-\t-\t-\t-")
        else:
            lines.append(
                "\t".join(
                    [
                        req["req_id"],
                        req["status"],
                        best["segment_id"],
                        f"{best['score']:.4f}",
                        f"{best['similarity']:.4f}",
                        ",".join(best["matched_roles"]) or "-",
                        ",".join(best["missing"]) or "-",
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def rules_tsv(report: dict) -> str:
    lines = ["rule_id\tstatus\tmissing_atoms"]
    for rule in report["rules"]:
        lines.append(
            f"{rule['rule_id']}\t{rule['status']}\t{','.join(rule['missing_atoms']) or '-'}"
        )
    return "\n".join(lines) + "\n"


def _new_axes(width: float = 7.0, height: float = 4.0):
    fig, ax = plt.subplots(figsize=(width, height))
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    return fig, ax


def plot_requirement_scores(report: dict, path: Path) -> None:
    """Horizontal bars of best satisfaction scores, threshold line at tau_sat."""
    reqs = report["requirements"]
    labels = [r["req_id"] for r in reqs]
    scores = [r["best"]["score"] if r.get("best") else 0.0 for r in reqs]
    colors = [_STATUS_COLORS.get(r["status"], "#616161") for r in reqs]
    fig, ax = _new_axes(height=max(2.0, 0.5 * len(reqs) + 1.2))
    ax.barh(range(len(reqs)), scores, color=colors)
    ax.set_yticks(range(len(reqs)))
    ax.set_yticklabels(labels)
    ax.invert_yaxis()
    tau_sat = report["config"]["tau_sat"]
    ax.axvline(tau_sat, color="#424242", linestyle="--", linewidth=1, label=f"tau_sat = {tau_sat}")
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("satisfaction score (matched roles / required roles)")
    ax.set_title(f"Requirement satisfaction — {report['doc_id']}")
    ax.legend(loc="lower right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_rule_verdicts(report: dict, path: Path) -> None:
    """One bar per rule, colored by verdict."""
    rules = report["rules"]
    fig, ax = _new_axes(height=max(2.0, 0.5 * len(rules) + 1.2))
    ax.barh(
        range(len(rules)),
        [1.0] * len(rules),
        color=[_STATUS_COLORS.get(r["status"], "#616161") for r in rules],
    )
    ax.set_yticks(range(len(rules)))
    ax.set_yticklabels([r["rule_id"] for r in rules])
    ax.invert_yaxis()
    ax.set_xticks([])
    for i, rule in enumerate(rules):
        note = rule["status"]
        if rule["missing_atoms"]:
            note += f" (missing: {', '.join(rule['missing_atoms'])})"
        ax.text(0.02, i, note, va="center", ha="left", color="white", fontsize=9)
    ax.set_title(f"Template-rule verdicts — {report['doc_id']}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_role_alignment(report: dict, path: Path) -> None:
    """Stacked matched/missing role counts per requirement."""
    reqs = [r for r in report["requirements"] if r.get("best")]
    fig, ax = _new_axes(height=max(2.0, 0.5 * max(len(reqs), 1) + 1.2))
    labels = [r["req_id"] for r in reqs]
    matched = [len(r["best"]["matched_roles"]) for r in reqs]
    unmatched = [len(r["best"]["missing"]) for r in reqs]
    ax.barh(range(len(reqs)), matched, color="#2e7d32", label="matched")
    ax.barh(range(len(reqs)), unmatched, left=matched, color="#c62828", label="missing")
    ax.set_yticks(range(len(reqs)))
    ax.set_yticklabels(labels)
    ax.invert_yaxis()
    ax.set_xlabel("roles")
    ax.set_title(f"Role alignment — {report['doc_id']}")
    ax.legend(loc="lower right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_files(report: dict, out_dir: str | Path, figures: bool = True) -> list[Path]:
    """Write TSV tables and figures next to the JSON report; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    req_tsv = out / "requirements.tsv"
    req_tsv.write_text(requirements_tsv(report), encoding="utf-8")
    written.append(req_tsv)
    rule_tsv = out / "rules.tsv"
    rule_tsv.write_text(rules_tsv(report), encoding="utf-8")
    written.append(rule_tsv)
    if figures:
        fig_dir = out / "figures"
        fig_dir.mkdir(exist_ok=True)
        if report["requirements"]:
            plot_requirement_scores(report, fig_dir / "requirement_scores.png")
            written.append(fig_dir / "requirement_scores.png")
            plot_role_alignment(report, fig_dir / "role_alignment.png")
            written.append(fig_dir / "role_alignment.png")
        if report["rules"]:
            plot_rule_verdicts(report, fig_dir / "rule_verdicts.png")
            written.append(fig_dir / "rule_verdicts.png")
    return written
