"""Table reproduction, discriminant sweeps, Markoff reports and their
rendering as text / CSV / JSON, plus optional matplotlib figures.

Row data stays numeric (gmpy2 values) in process; serialization renders
decimal strings at the requested digit count so no precision is lost on the
way out.  Sweeps fan out over a process pool when jobs > 1 and are always
emitted ordered by (D, class_index).
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import numerics
from .errors import DomainError
from .heckeval import val
from .markoff import MarkoffReport, theta, tree
from .quadratic import (
    QuadIrr,
    cf_value,
    class_order,
    form_cycle,
    is_discriminant,
    narrow_class_reps,
    parse_surd,
    pell_fundamental,
    surd_str,
    wide_class_count,
)

CSV_COLUMNS = (
    "D", "rep_a", "rep_b", "rep_c", "re_val", "im_val", "log_eps",
    "norm_eps", "h_plus", "class_index", "est_error", "nodes",
)

# rows of the reference tables: purely periodic continued fractions ...
TABLE_CF_WORDS = {
    1: [[n] for n in (*range(1, 11), 20, 30, 50, 100)],
    2: [[n, 1] for n in (*range(2, 11), 20, 30, 50, 100)],
    3: [[n, 2] for n in range(3, 11)],
    4: [[2] + [1] * k for k in range(0, 7)],
    5: [[3] + [1] * k for k in range(0, 7)],
}

# ... the first non-real values ...
TABLE6_SURDS = [
    "(12+sqrt(34))/11", "(10+sqrt(34))/11",
    "(33+sqrt(205))/34", "(25+sqrt(205))/30",
    "(21+sqrt(221))/22", "(23+sqrt(221))/22",
    "(47+sqrt(305))/56", "(35+sqrt(305))/46",
    "(23+sqrt(79))/25", "(13+sqrt(79))/15",
    "(17+sqrt(79))/15", "(17+sqrt(79))/21",
]

# ... and the Markoff irrationalities (i <= 10 needs four generations).
TABLE7_DEPTH = 4
TABLE7_COUNT = 10


@dataclass
class ClassRow:
    """One evaluated narrow class; the fixed CSV row."""

    D: int
    rep: tuple[int, int, int]
    value: object
    log_eps: object
    norm_eps: int
    h_plus: int
    class_index: int
    est_error: object
    nodes: int
    label: str = ""

    def is_real(self, p_target: int) -> bool:
        return abs(float(self.value.imag)) < 2.0 ** (-(p_target - 8))

    def as_record(self, digits: int) -> dict:
        return {
            "D": self.D,
            "rep_a": self.rep[0],
            "rep_b": self.rep[1],
            "rep_c": self.rep[2],
            "re_val": numerics.to_decimal(self.value.real, digits),
            "im_val": numerics.to_decimal(self.value.imag, digits),
            "log_eps": numerics.to_decimal(self.log_eps, min(digits, 20)),
            "norm_eps": self.norm_eps,
            "h_plus": self.h_plus,
            "class_index": self.class_index,
            "est_error": format(float(self.est_error), ".3e"),
            "nodes": self.nodes,
        }


def evaluate_irrational(w: QuadIrr, p_target: int, label: str = "",
                        max_doublings: int | None = None) -> ClassRow:
    """val at one irrationality together with its class metadata."""
    classes = narrow_class_reps(w.disc)
    idx = -1
    cyc0 = form_cycle(w.form)[0]
    for i, cl in enumerate(classes):
        if cyc0 in cl.cycle:
            idx = i
            break
    unit = pell_fundamental(w.disc)
    kw = {}
    if max_doublings is not None:
        kw["max_doublings"] = max_doublings
    r = val(w, p_target, **kw)
    return ClassRow(
        D=w.disc,
        rep=w.form,
        value=r.value,
        log_eps=unit.log_eps(max(p_target, 64)),
        norm_eps=unit.norm_eps,
        h_plus=len(classes),
        class_index=idx,
        est_error=r.est_error,
        nodes=r.nodes_used,
        label=label,
    )


def class_rows(D: int, p_target: int) -> list[ClassRow]:
    """One row per narrow class of D, ordered by class index."""
    classes = narrow_class_reps(D)
    unit = pell_fundamental(D)
    log_eps = unit.log_eps(max(p_target, 64))
    rows = []
    for i, cl in enumerate(classes):
        r = val(cl.representative, p_target)
        rows.append(ClassRow(
            D=D, rep=cl.cycle[0], value=r.value, log_eps=log_eps,
            norm_eps=unit.norm_eps, h_plus=len(classes), class_index=i,
            est_error=r.est_error, nodes=r.nodes_used,
        ))
    return rows


def discriminants_up_to(d_max: int) -> list[int]:
    return [D for D in range(5, d_max + 1) if is_discriminant(D)]


def _sweep_worker(args):
    D, p_target = args
    return class_rows(D, p_target)


def sweep_rows(d_max: int, p_target: int, jobs: int = 1) -> list[ClassRow]:
    """val for every narrow class with D <= d_max, ordered by (D, class_index)."""
    if d_max < 5:
        raise DomainError("sweep requires d_max >= 5")
    discs = discriminants_up_to(d_max)
    rows: list[ClassRow] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_sweep_worker, [(D, p_target) for D in discs],
                                  chunksize=8):
                rows.extend(chunk)
    else:
        for D in discs:
            rows.extend(class_rows(D, p_target))
    return rows


@dataclass
class SweepSummary:
    rows: int
    real_rows: int
    min_real: float
    min_real_at: tuple[int, int]
    max_real: float
    min_re_all: float
    min_re_all_at: tuple[int, int]
    max_abs_im: float
    hist_bin_width: float
    hist: list[tuple[float, int]]

    def as_record(self) -> dict:
        return {
            "rows": self.rows,
            "real_rows": self.real_rows,
            "min_real": repr(self.min_real),
            "min_real_at": {"D": self.min_real_at[0], "class_index": self.min_real_at[1]},
            "max_real": repr(self.max_real),
            "min_re_all": repr(self.min_re_all),
            "min_re_all_at": {"D": self.min_re_all_at[0], "class_index": self.min_re_all_at[1]},
            "max_abs_im": repr(self.max_abs_im),
            "hist_bin_width": self.hist_bin_width,
            "hist": [{"lo": lo, "count": n} for lo, n in self.hist],
        }


def sweep_summary(rows: list[ClassRow], p_target: int,
                  bin_width: float = 0.1) -> SweepSummary:
    """Extremes and the fixed-width histogram of the imaginary parts."""
    if not rows:
        raise DomainError("empty sweep")
    real_rows = [r for r in rows if r.is_real(p_target)]
    min_real_row = min(real_rows, key=lambda r: float(r.value.real))
    max_real_row = max(real_rows, key=lambda r: float(r.value.real))
    min_re_row = min(rows, key=lambda r: float(r.value.real))
    max_im = max(abs(float(r.value.imag)) for r in rows)
    nbins = 2 * math.ceil(1.0 / bin_width)
    counts = [0] * nbins
    for r in rows:
        x = float(r.value.imag)
        k = int((x + nbins * bin_width / 2) / bin_width)
        counts[min(max(k, 0), nbins - 1)] += 1
    lo0 = -nbins * bin_width / 2
    hist = [(lo0 + i * bin_width, counts[i]) for i in range(nbins)]
    return SweepSummary(
        rows=len(rows),
        real_rows=len(real_rows),
        min_real=float(min_real_row.value.real),
        min_real_at=(min_real_row.D, min_real_row.class_index),
        max_real=float(max_real_row.value.real),
        min_re_all=float(min_re_row.value.real),
        min_re_all_at=(min_re_row.D, min_re_row.class_index),
        max_abs_im=max_im,
        hist_bin_width=bin_width,
        hist=hist,
    )


def table_rows(k: int, p_target: int) -> list[ClassRow]:
    """Rows of reference table k (1..7), as evaluated ClassRows with labels."""
    if k in TABLE_CF_WORDS:
        out = []
        for word in TABLE_CF_WORDS[k]:
            w = cf_value(word)
            label = "[" + ",".join(str(b) for b in word) + "]"
            out.append(evaluate_irrational(w, p_target, label=label))
        return out
    if k == 6:
        return [evaluate_irrational(parse_surd(s), p_target, label=s)
                for s in TABLE6_SURDS]
    if k == 7:
        nodes = sorted(tree(TABLE7_DEPTH), key=lambda nd: nd.m)[:TABLE7_COUNT]
        out = []
        for i, node in enumerate(nodes, start=1):
            th = theta(node)
            row = evaluate_irrational(th.theta1, p_target,
                                      label=f"theta_{i},1 m={node.m}")
            out.append(row)
        return out
    raise DomainError(f"no such table: {k} (valid: 1..7)")


@dataclass
class ClassesReport:
    D: int
    h: int
    h_plus: int
    norm_eps: int
    log_eps: object
    orders: list[int]
    rows: list[ClassRow]
    p_target: int

    def as_record(self, digits: int) -> dict:
        return {
            "D": self.D,
            "h": self.h,
            "h_plus": self.h_plus,
            "norm_eps": self.norm_eps,
            "log_eps": numerics.to_decimal(self.log_eps, min(digits, 20)),
            "orders": self.orders,
            "real_flags": [r.is_real(self.p_target) for r in self.rows],
            "classes": [dict(r.as_record(digits), order=o, rep=surd_str(QuadIrr(*r.rep)))
                        for r, o in zip(self.rows, self.orders)],
        }


def classes_report(D: int, p_target: int) -> ClassesReport:
    classes = narrow_class_reps(D)
    rows = class_rows(D, p_target)
    unit = pell_fundamental(D)
    return ClassesReport(
        D=D,
        h=wide_class_count(classes),
        h_plus=len(classes),
        norm_eps=unit.norm_eps,
        log_eps=unit.log_eps(max(p_target, 64)),
        orders=[class_order(cl) for cl in classes],
        rows=rows,
        p_target=p_target,
    )


# ---------------------------------------------------------------------------
# rendering

def rows_to_csv(rows: list[ClassRow], digits: int, with_labels: bool = False) -> str:
    buf = io.StringIO()
    cols = CSV_COLUMNS + (("label",) if with_labels else ())
    buf.write(",".join(cols) + "\n")
    for r in rows:
        rec = r.as_record(digits)
        cells = [str(rec[c]) for c in CSV_COLUMNS]
        if with_labels:
            cells.append('"%s"' % r.label.replace('"', '""'))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def rows_to_json(rows: list[ClassRow], digits: int, summary=None, extra=None) -> str:
    payload = {"rows": []}
    for r in rows:
        rec = r.as_record(digits)
        if r.label:
            rec["label"] = r.label
        payload["rows"].append(rec)
    if summary is not None:
        payload["summary"] = summary.as_record()
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2)


def rows_to_text(rows: list[ClassRow], digits: int, title: str = "",
                 p_target: int | None = None) -> str:
    lines = []
    if title:
        lines.append(title)
    labeled = any(r.label for r in rows)
    for r in rows:
        v = numerics.complex_to_decimal(r.value, digits)
        head = f"{r.label:<22} " if labeled else ""
        tail = ""
        if p_target is not None:
            tail = "  real" if r.is_real(p_target) else "  complex"
        lines.append(
            f"{head}D={r.D:<7} val={v}  log_eps={numerics.to_decimal(r.log_eps, 14)}"
            f"  h+={r.h_plus} cls={r.class_index} err={float(r.est_error):.2e} nodes={r.nodes}{tail}"
        )
    return "\n".join(lines) + "\n"


def summary_to_text(s: SweepSummary) -> str:
    lines = [
        f"rows: {s.rows} (real: {s.real_rows})",
        f"min real val: {s.min_real!r} at D={s.min_real_at[0]} class {s.min_real_at[1]}",
        f"max real val: {s.max_real!r}",
        f"min Re over all: {s.min_re_all!r} at D={s.min_re_all_at[0]}",
        f"max |Im|: {s.max_abs_im!r}",
        "Im histogram (bin lower edge: count):",
    ]
    for lo, n in s.hist:
        if n:
            lines.append(f"  {lo:+.2f}: {n}")
    return "\n".join(lines) + "\n"


def markoff_report_text(rep: MarkoffReport, digits: int) -> str:
    lines = ["Markoff irrationalities and their values:"]
    for row in rep.rows:
        th = row.thetas
        lines.append(
            f"i={row.index:<3} m={th.m:<8} theta1={surd_str(th.theta1):<28} "
            f"val={numerics.complex_to_decimal(row.val1, digits)}"
        )
        lines.append(
            f"{'':9}{'':11}theta2={surd_str(th.theta2):<28} "
            f"val={numerics.complex_to_decimal(row.val2, digits)}"
        )
    lines.append("")
    lines.append("observation flags:")
    iv = [r for r in rep.rows if r.thetas.m > 2 and (r.real1 or r.real2)]
    lines.append(f"  realness: non-real for m>2: {'ok' if not iv else 'VIOLATED at ' + str([r.thetas.m for r in iv])}")
    v_bad = [r.thetas.m for r in rep.rows
             if r.thetas.m > 2 and not (r.im1_positive and r.im2_negative)]
    lines.append(f"  sign pattern: Im val(theta1)>0>Im val(theta2): {'ok' if not v_bad else 'VIOLATED at ' + str(v_bad)}")
    vi_bad = [b.child.m for b in rep.betweenness
              if not b.exceptional and not (all(b.ok_re) and all(b.ok_im))]
    vi_exc = [b.child.m for b in rep.betweenness if b.exceptional]
    vi_line = f"  betweenness: {'ok' if not vi_bad else 'VIOLATED at ' + str(vi_bad)}"
    if vi_exc:
        vi_line += f" (exceptional triple at m={vi_exc})"
    lines.append(vi_line)
    for nl in rep.neighbor_limits:
        ds = ", ".join(f"{d:.3e}" for d in nl.deltas)
        lines.append(f"  neighbor limits: m={nl.node.m} side {nl.side}: |val - limit| = {ds}")
    res = [float(v.real) for r in rep.rows for v in (r.val1, r.val2)]
    ims = [float(v.imag) for r in rep.rows for v in (r.val1, r.val2)]
    vals_by_m = {r.thetas.m: r for r in rep.rows}
    lines.append(f"  real parts in [{min(res):.10f}, {max(res):.10f}]")
    if 1 in vals_by_m and 2 in vals_by_m:
        lines.append(
            "  conjectured enclosing interval "
            f"[{float(vals_by_m[1].val1.real):.10f}, {float(vals_by_m[2].val1.real):.10f}]"
        )
    lines.append(f"  imaginary extremes +-{max(abs(x) for x in ims):.10f}")
    if 5 in vals_by_m:
        lines.append(
            f"  conjectured bound +-{abs(float(vals_by_m[5].val1.imag)):.10f}"
            " (the third region's value)"
        )
    lines.append("")
    lines.append("tree of values:")
    lines.extend(markoff_tree_text(rep, digits))
    return "\n".join(lines) + "\n"


def markoff_tree_text(rep: MarkoffReport, digits: int) -> list[str]:
    """The annotated Markoff tree as indented text, one region per line."""
    by_path = {row.node.path: row for row in rep.rows}
    out = []

    def fmt(row):
        v = row.val1
        re = numerics.to_decimal(v.real, min(digits, 12))
        im = float(v.imag)
        return f"m={row.thetas.m}: {re}" + (f" +-{abs(im):.6f}i" if abs(im) > rep.real_tol else "")

    for path in ("1", "2"):
        if path in by_path:
            out.append(fmt(by_path[path]))

    def walk(path, indent):
        row = by_path.get(path)
        if row is None:
            return
        out.append("  " * indent + fmt(row))
        walk(path + "L", indent + 1)
        walk(path + "R", indent + 1)

    walk("", 1)
    return out


def markoff_rows_json(rep: MarkoffReport, digits: int) -> dict:
    rows = []
    for row in rep.rows:
        th = row.thetas
        rows.append({
            "i": row.index, "m": th.m, "a": row.node.a, "b": row.node.b,
            "path": row.node.path, "k1": th.k1, "k2": th.k2,
            "D": th.disc,
            "theta1": surd_str(th.theta1), "theta2": surd_str(th.theta2),
            "re_val1": numerics.to_decimal(row.val1.real, digits),
            "im_val1": numerics.to_decimal(row.val1.imag, digits),
            "re_val2": numerics.to_decimal(row.val2.real, digits),
            "im_val2": numerics.to_decimal(row.val2.imag, digits),
            "real": row.real1 or row.real2,
            "im1_positive": row.im1_positive,
            "im2_negative": row.im2_negative,
        })
    return {
        "rows": rows,
        "betweenness": [
            {"m": b.child.m, "ok_re": list(b.ok_re), "ok_im": list(b.ok_im),
             "exceptional": b.exceptional}
            for b in rep.betweenness
        ],
        "neighbor_limits": [
            {"m": nl.node.m, "side": nl.side, "deltas": nl.deltas}
            for nl in rep.neighbor_limits
        ],
    }


def markoff_rows_csv(rep: MarkoffReport, digits: int) -> str:
    buf = io.StringIO()
    buf.write("i,m,a,b,path,k1,k2,D,theta1,theta2,re_val1,im_val1,re_val2,im_val2\n")
    for row in rep.rows:
        th = row.thetas
        buf.write(",".join(str(x) for x in (
            row.index, th.m, row.node.a, row.node.b, row.node.path or "-",
            th.k1, th.k2, th.disc,
            f'"{surd_str(th.theta1)}"', f'"{surd_str(th.theta2)}"',
            numerics.to_decimal(row.val1.real, digits),
            numerics.to_decimal(row.val1.imag, digits),
            numerics.to_decimal(row.val2.real, digits),
            numerics.to_decimal(row.val2.imag, digits),
        )) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# figures

def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_sweep_figures(rows: list[ClassRow], summary: SweepSummary, base: str) -> list[str]:
    """Histogram of Im val and the (D, Re val) scatter, written next to the data."""
    plt = _plt()
    paths = []
    ims = [float(r.value.imag) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    nb = len(summary.hist)
    ax.hist(ims, bins=[summary.hist[0][0] + i * summary.hist_bin_width for i in range(nb + 1)],
            color="#4878a8", edgecolor="black", linewidth=0.3)
    ax.set_xlabel("Im val")
    ax.set_ylabel("classes")
    ax.set_title("distribution of imaginary parts")
    fig.tight_layout()
    p = f"{base}_im_hist.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    ds = [r.D for r in rows]
    res = [float(r.value.real) for r in rows]
    colors = ["#c44e52" if abs(im) > 1e-12 else "#4878a8" for im in ims]
    ax.scatter(ds, res, s=8, c=colors, linewidths=0)
    ax.axhline(744, color="gray", lw=0.8, ls="--")
    ax.axhline(float(summary.min_real), color="gray", lw=0.8, ls=":")
    ax.set_xlabel("D")
    ax.set_ylabel("Re val")
    ax.set_title("values against the discriminant")
    fig.tight_layout()
    p = f"{base}_re_scatter.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)
    return paths


def render_table_figure(rows: list[ClassRow], k: int, base: str) -> list[str]:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = list(range(1, len(rows) + 1))
    ys = [float(r.value.real) for r in rows]
    ax.plot(xs, ys, "o-", ms=4)
    ax.set_xticks(xs)
    ax.set_xticklabels([r.label or str(r.D) for r in rows], rotation=60, fontsize=7)
    ax.set_ylabel("Re val")
    ax.set_title(f"table {k}")
    fig.tight_layout()
    p = f"{base}_table{k}.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return [p]


def render_markoff_figure(rep: MarkoffReport, base: str) -> list[str]:
    """The value-annotated Markoff tree, in the style of the picture in the notes."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(8, 6))
    by_path = {row.node.path: row for row in rep.rows}

    def pos(path):
        x, y, span = 0.5, 0.0, 0.25
        for ch in path:
            x += span if ch == "R" else -span
            y -= 1.0
            span /= 2
        return x, y

    for row in rep.rows:
        if row.node.path in ("1", "2"):
            continue
        x, y = pos(row.node.path)
        if row.node.path:
            px, py = pos(row.node.path[:-1])
            ax.plot([px, x], [py, y], color="gray", lw=0.8, zorder=1)
        label = f"{row.thetas.m}\n{float(row.val1.real):.5f}"
        if abs(float(row.val1.imag)) > rep.real_tol:
            label += f"\n±{abs(float(row.val1.imag)):.4f}i"
        ax.annotate(label, (x, y), ha="center", fontsize=7,
                    bbox=dict(boxstyle="round", fc="#eef2f8", ec="#4878a8", lw=0.6))
    for path, dx in (("1", -0.35), ("2", 0.35)):
        row = by_path.get(path)
        if row:
            ax.annotate(f"{row.thetas.m}\n{float(row.val1.real):.5f}", (0.5 + dx, 0.8),
                        ha="center", fontsize=8,
                        bbox=dict(boxstyle="round", fc="#f8f2ee", ec="#c44e52", lw=0.6))
    ax.set_axis_off()
    ax.set_title("values in the Markoff tree")
    fig.tight_layout()
    p = f"{base}_markoff_tree.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return [p]
