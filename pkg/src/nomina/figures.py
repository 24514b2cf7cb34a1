"""Figure rendering for the report path (presentation layer, not reporting)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .report import InventoryTable, ProcedureMatrix  # noqa: E402
from .transfer import PROCEDURES  # noqa: E402

_PROCEDURE_COLORS = {
    "Borrowing": "#4c72b0",
    "Assimilation": "#dd8452",
    "Calque": "#55a868",
    "Absence": "#c44e52",
    "Other": "#8172b3",
}


def render_inventory_figure(inventory: InventoryTable, path) -> None:
    """Grouped bars of total vs distinct occurrences per hypertype."""
    labels = [r.hypertype for r in inventory.rows]
    occurrences = [r.occurrences for r in inventory.rows]
    distinct = [r.distinct for r in inventory.rows]
    x = range(len(labels))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([i - 0.2 for i in x], occurrences, width=0.4, label="occurrences",
           color="#4c72b0")
    ax.bar([i + 0.2 for i in x], distinct, width=0.4, label="distinct",
           color="#dd8452")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel("count")
    ax.set_title("Proper names in the pivot text")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_procedure_figure(matrix: ProcedureMatrix, path) -> None:
    """Stacked horizontal bars: procedure shares per target version."""
    rows = list(matrix.row_labels)
    fig, ax = plt.subplots(figsize=(8, 1.2 + 0.6 * max(1, len(rows))))
    left = [0.0] * len(rows)
    for proc in PROCEDURES:
        values = [matrix.percentage(row, proc) for row in rows]
        ax.barh(rows, values, left=left, label=proc,
                color=_PROCEDURE_COLORS[proc])
        left = [l + v for l, v in zip(left, values)]
    ax.set_xlim(0, 100.5)
    ax.invert_yaxis()
    ax.set_xlabel("% of classified name occurrences")
    ax.set_title("Translation procedures per target version")
    ax.legend(ncol=len(PROCEDURES), fontsize=8, loc="upper center",
              bbox_to_anchor=(0.5, -0.18))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
