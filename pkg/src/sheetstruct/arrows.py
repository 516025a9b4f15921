"""Models: attributes laid out onto cells, and the algebra that regroups them.

A model re-expresses a workbook as a list of *attributes*.  Each
attribute is an array: an index domain (``1..n`` or an ordered label
set), an injective *layout* from indices to cell addresses, and one
expression per index.  ``decompile`` turns every non-empty cell into a
single-cell attribute; ``compile`` is its inverse and stays an inverse
under every transform in this module — that is the algebra's soundness
law, checked by :func:`validate_model` and the round-trip tests.

Transforms: :class:`Group` merges single-cell attributes into an array
and rewrites all references to them; :class:`Ungroup` is its exact
inverse; :class:`Rename` renames; :class:`NameFromLabel` renames from an
adjacent label cell and absorbs that label into ``label_meta`` so
compilation can still re-emit it.

``generalize`` detects that an attribute's per-index equations instantiate
one template over the index parameter ``t``; ``emit_mm`` prints the model
as an MM program::

    <Income[1..3] Outgoings[1..3] Profit[1..3]>
    where
    Profit[all t] = Income[t] - Outgoings[t]

Attributes whose cells are all data literals state no equations — their
values are data, not derived — so a fully grouped data column contributes
only its signature.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .cells import Address, CellContent, Formula, Number, Text, Workbook, col_to_letters
from .factbase import FactBase, is_label
from .formula import (
    AttrRange,
    AttrRef,
    ConstIndex,
    EnumIndex,
    Expr,
    FormulaError,
    Num,
    ParamIndex,
    RangeRef,
    Ref,
    Str,
    _map_exprs,
    print_formula,
    render_expr,
    rewrite_refs,
)
from .grammar import Match

__all__ = [
    "RangeDomain",
    "EnumDomain",
    "Attribute",
    "Model",
    "Group",
    "Rename",
    "Ungroup",
    "NameFromLabel",
    "Transform",
    "TransformError",
    "ModelError",
    "decompile",
    "compile_model",
    "validate_model",
    "apply_transform",
    "apply_group",
    "apply_rename",
    "apply_ungroup",
    "apply_name_from_label",
    "infer_name",
    "match_to_transforms",
    "generalize",
    "instantiate_template",
    "emit_mm",
    "model_summary",
    "sanitize_identifier",
]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class TransformError(ValueError):
    """A transform whose preconditions do not hold; the model is unchanged."""


class ModelError(ValueError):
    """A model that violates its own invariants (validator / compile checks)."""


# === domain types =====================================================

@dataclass(frozen=True)
class RangeDomain:
    """Indices 1..n."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ModelError(f"range domain needs n >= 1, got {self.n}")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))


@dataclass(frozen=True)
class EnumDomain:
    """Ordered, distinct label indices (Property1, Property2, ...)."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise ModelError("enum domain needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ModelError(f"enum labels are not distinct: {self.labels}")
        for lab in self.labels:
            if not _IDENT_RE.match(lab):
                raise ModelError(f"enum label is not an identifier: {lab!r}")

    @property
    def indices(self) -> tuple[str, ...]:
        return self.labels


@dataclass(frozen=True)
class Attribute:
    """A named array of cells: index -> address (layout) and index -> expr."""

    name: str
    domain: RangeDomain | EnumDomain
    layout: dict
    exprs: dict
    label_meta: tuple[tuple[Address, str], ...] = ()

    @property
    def indices(self) -> tuple:
        return self.domain.indices

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def cells(self) -> tuple[Address, ...]:
        return tuple(self.layout[i] for i in self.indices)

    def first_cell(self) -> Address:
        return self.layout[self.indices[0]]


@dataclass(frozen=True)
class Model:
    attributes: tuple[Attribute, ...] = ()

    def attribute(self, name: str) -> Attribute | None:
        for a in self.attributes:
            if a.name == name:
                return a
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)


@dataclass(frozen=True)
class Group:
    """Merge single-cell attributes into one array, in the given cell order.

    ``index_labels``, when given, makes the new domain an enumeration
    (one label per cell) instead of 1..n.
    """

    cells: tuple[Address, ...]
    name: str
    index_labels: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Rename:
    old: str
    new: str


@dataclass(frozen=True)
class Ungroup:
    name: str


@dataclass(frozen=True)
class NameFromLabel:
    """Rename an attribute after an adjacent label cell and absorb the label."""

    name: str


Transform = Group | Rename | Ungroup | NameFromLabel


# === decompile / compile ==============================================

def sanitize_identifier(text: str) -> str | None:
    """Collapse arbitrary text to an identifier, or None if nothing is left."""
    out = re.sub(r"[^A-Za-z0-9]+", "_", text.strip()).strip("_")
    if not out:
        return None
    if out[0].isdigit():
        out = "_" + out
    return out


def _address_name(addr: Address, multi_sheet: bool) -> str:
    a1 = f"{col_to_letters(addr.col)}{addr.row}"
    if not multi_sheet:
        return a1
    prefix = sanitize_identifier(addr.sheet) or "Sheet"
    return f"{prefix}_{a1}"


def _fresh_name(base: str, used: set[str]) -> str:
    name, k = base, 1
    while name in used:
        k += 1
        name = f"{base}_{k}"
    return name


def _content_expr(content: CellContent) -> Expr:
    if isinstance(content, Number):
        return Num(content.value)
    if isinstance(content, Text):
        return Str(content.value)
    if isinstance(content, Formula):
        return content.ast  # type: ignore[return-value]
    raise ModelError(f"unknown cell content {content!r}")


def _expr_content(e: Expr) -> CellContent:
    if isinstance(e, Num):
        return Number(e.value)
    if isinstance(e, Str):
        return Text(e.value)
    return Formula(print_formula(e), e)


def _single_cell_attribute(name: str, addr: Address, e: Expr) -> Attribute:
    return Attribute(name, RangeDomain(1), {1: addr}, {1: e})


def decompile(wb: Workbook) -> Model:
    """One single-cell attribute per non-empty cell, named by its address.

    Attributes are listed sheet by sheet, then column-major within a sheet
    (A1, A2, ..., B1, ...); sheet prefixes appear in names only when the
    workbook has several sheets.
    """
    multi = len(wb.sheets) > 1
    used: set[str] = set()
    attrs: list[Attribute] = []
    for sheet in wb.sheets:
        addrs = sorted(
            (a for a in wb.cells if a.sheet == sheet), key=lambda a: (a.col, a.row)
        )
        for addr in addrs:
            name = _fresh_name(_address_name(addr, multi), used)
            used.add(name)
            attrs.append(
                _single_cell_attribute(name, addr, _content_expr(wb.cells[addr]))
            )
    return Model(tuple(attrs))


def _resolve_attr_parts(m: Model, e: Expr, host: Address) -> Expr:
    """Rewrite attribute references back to plain cell references at ``host``."""

    def fn(node: Expr) -> Expr | None:
        if isinstance(node, AttrRef):
            attr = m.attribute(node.attr)
            if attr is None:
                raise ModelError(f"reference to unknown attribute {node.attr!r}")
            if isinstance(node.index, ConstIndex):
                idx = node.index.value
            elif isinstance(node.index, EnumIndex):
                idx = node.index.label
            else:
                raise ModelError(
                    f"unresolved index parameter in reference to {node.attr!r}"
                )
            if idx not in attr.layout:
                raise ModelError(f"index {idx!r} outside attribute {node.attr!r}")
            target = attr.layout[idx]
            return Ref(
                target,
                col_abs=node.col_abs,
                row_abs=node.row_abs,
                sheet_explicit=target.sheet != host.sheet,
            )
        if isinstance(node, AttrRange):
            attr = m.attribute(node.attr)
            if attr is None:
                raise ModelError(f"reference to unknown attribute {node.attr!r}")
            if not isinstance(attr.domain, RangeDomain):
                raise ModelError(
                    f"range over non-array attribute {node.attr!r}"
                )
            for idx in (node.lo, node.hi):
                if idx not in attr.layout:
                    raise ModelError(
                        f"index {idx!r} outside attribute {node.attr!r}"
                    )
            lo, hi = attr.layout[node.lo], attr.layout[node.hi]
            return RangeRef(
                Ref(
                    lo,
                    col_abs=node.start_flags[0],
                    row_abs=node.start_flags[1],
                    sheet_explicit=lo.sheet != host.sheet,
                ),
                Ref(
                    hi,
                    col_abs=node.end_flags[0],
                    row_abs=node.end_flags[1],
                    sheet_explicit=hi.sheet != host.sheet,
                ),
            )
        return None

    return _map_exprs(e, fn)


def compile_model(m: Model) -> Workbook:
    """Lay every attribute's expressions back onto cells.

    Attribute references become plain cell references through the target
    attribute's layout; absorbed labels are re-emitted at their recorded
    addresses.  Overlapping layouts are rejected.
    """
    cells: dict[Address, CellContent] = {}
    owners: dict[Address, str] = {}
    for attr in m.attributes:
        for idx in attr.indices:
            addr = attr.layout[idx]
            if addr in owners:
                raise ModelError(
                    f"attributes {owners[addr]!r} and {attr.name!r} both "
                    f"lay out cell {addr!r}"
                )
            owners[addr] = attr.name
            cells[addr] = _expr_content(_resolve_attr_parts(m, attr.exprs[idx], addr))
    for attr in m.attributes:
        for addr, text in attr.label_meta:
            if addr in owners:
                raise ModelError(
                    f"label of {attr.name!r} and attribute {owners[addr]!r} "
                    f"both lay out cell {addr!r}"
                )
            owners[addr] = attr.name
            cells[addr] = Text(text)
    return Workbook(cells)


def validate_model(m: Model) -> None:
    """Check every model invariant; raises :class:`ModelError` on the first hole."""
    seen_names: set[str] = set()
    owners: dict[Address, str] = {}
    for attr in m.attributes:
        if not _IDENT_RE.match(attr.name):
            raise ModelError(f"attribute name is not an identifier: {attr.name!r}")
        if attr.name in seen_names:
            raise ModelError(f"duplicate attribute name {attr.name!r}")
        seen_names.add(attr.name)
        indices = attr.indices
        if set(attr.layout) != set(indices) or set(attr.exprs) != set(indices):
            raise ModelError(f"attribute {attr.name!r} is not total on its domain")
        sheets = {attr.layout[i].sheet for i in indices}
        if len(sheets) > 1:
            raise ModelError(f"attribute {attr.name!r} spans sheets {sorted(sheets)}")
        for i in indices:
            addr = attr.layout[i]
            if addr in owners:
                raise ModelError(
                    f"attributes {owners[addr]!r} and {attr.name!r} overlap at {addr!r}"
                )
            owners[addr] = attr.name
        for addr, _text in attr.label_meta:
            if addr in owners:
                raise ModelError(
                    f"label cell {addr!r} of {attr.name!r} overlaps {owners[addr]!r}"
                )
            owners[addr] = attr.name
    for attr in m.attributes:
        for i in attr.indices:
            _check_resolvable(m, attr.exprs[i], f"{attr.name}[{i}]")


def _check_resolvable(m: Model, e: Expr, where: str) -> None:
    def fn(node: Expr) -> Expr | None:
        if isinstance(node, AttrRef):
            attr = m.attribute(node.attr)
            if attr is None:
                raise ModelError(f"{where} references unknown attribute {node.attr!r}")
            if isinstance(node.index, ConstIndex):
                if node.index.value not in attr.layout:
                    raise ModelError(
                        f"{where} references {node.attr}[{node.index.value}] "
                        "outside its domain"
                    )
            elif isinstance(node.index, EnumIndex):
                if node.index.label not in attr.layout:
                    raise ModelError(
                        f"{where} references {node.attr}[{node.index.label}] "
                        "outside its domain"
                    )
            else:
                raise ModelError(f"{where} holds an unresolved index parameter")
        elif isinstance(node, AttrRange):
            attr = m.attribute(node.attr)
            if attr is None:
                raise ModelError(f"{where} references unknown attribute {node.attr!r}")
            if not isinstance(attr.domain, RangeDomain):
                raise ModelError(f"{where} takes a range over enum {node.attr!r}")
            if not 1 <= node.lo <= node.hi <= attr.domain.n:
                raise ModelError(
                    f"{where} range [{node.lo}..{node.hi}] outside {node.attr!r}"
                )
        return None

    _map_exprs(e, fn)


# === transforms =======================================================

def _rewrite_model_exprs(attrs: list[Attribute], fn) -> list[Attribute]:
    out = []
    for attr in attrs:
        out.append(
            replace(attr, exprs={i: fn(e) for i, e in attr.exprs.items()})
        )
    return out


def apply_group(m: Model, t: Group) -> Model:
    """Merge the named single-cell attributes into one array attribute."""
    if not _IDENT_RE.match(t.name):
        raise TransformError(f"bad attribute name {t.name!r}")
    if not t.cells:
        raise TransformError("nothing to group")
    if len(set(t.cells)) != len(t.cells):
        raise TransformError("group cells are not distinct")

    by_cell: dict[Address, Attribute] = {}
    for attr in m.attributes:
        if attr.size == 1:
            by_cell[attr.first_cell()] = attr
    merged: list[Attribute] = []
    for c in t.cells:
        attr = by_cell.get(c)
        if attr is None:
            raise TransformError(f"cell {c!r} is not a single-cell attribute")
        merged.append(attr)
    merged_names = {a.name for a in merged}
    if t.name in set(m.names()) - merged_names:
        raise TransformError(f"attribute name {t.name!r} is taken")

    if t.index_labels is not None:
        if len(t.index_labels) != len(t.cells):
            raise TransformError(
                f"{len(t.index_labels)} labels for {len(t.cells)} cells"
            )
        domain: RangeDomain | EnumDomain = EnumDomain(tuple(t.index_labels))
    else:
        domain = RangeDomain(len(t.cells))
    indices = domain.indices
    layout = {indices[k]: t.cells[k] for k in range(len(t.cells))}
    exprs = {indices[k]: merged[k].exprs[1] for k in range(len(t.cells))}
    label_meta = tuple(lm for a in merged for lm in a.label_meta)
    grouped = Attribute(t.name, domain, layout, exprs, label_meta)

    subst = {
        t.cells[k]: AttrRef(
            t.name,
            ConstIndex(indices[k]) if isinstance(domain, RangeDomain)
            else EnumIndex(indices[k]),
        )
        for k in range(len(t.cells))
    }
    attrs = [
        grouped if a is merged[0] else a
        for a in m.attributes
        if a is merged[0] or a not in merged
    ]
    try:
        attrs = _rewrite_model_exprs(attrs, lambda e: rewrite_refs(e, subst))
    except FormulaError as exc:  # a range somewhere covers only part of the group
        raise TransformError(str(exc)) from exc
    return Model(tuple(attrs))


def apply_rename(m: Model, t: Rename) -> Model:
    if m.attribute(t.old) is None:
        raise TransformError(f"unknown attribute {t.old!r}")
    if not _IDENT_RE.match(t.new):
        raise TransformError(f"bad attribute name {t.new!r}")
    if t.new == t.old:
        return m
    if m.attribute(t.new) is not None:
        raise TransformError(f"attribute name {t.new!r} is taken")

    def fn(e: Expr) -> Expr:
        def sub(node: Expr) -> Expr | None:
            if isinstance(node, AttrRef) and node.attr == t.old:
                return replace(node, attr=t.new)
            if isinstance(node, AttrRange) and node.attr == t.old:
                return replace(node, attr=t.new)
            return None

        return _map_exprs(e, sub)

    attrs = [
        replace(a, name=t.new) if a.name == t.old else a for a in m.attributes
    ]
    return Model(tuple(_rewrite_model_exprs(attrs, fn)))


def _dissolve_refs(m: Model, target: Attribute) -> list[Attribute]:
    """Rewrite references to ``target`` back to plain cell references."""

    def fn(e: Expr) -> Expr:
        def sub(node: Expr) -> Expr | None:
            if isinstance(node, AttrRef) and node.attr == target.name:
                if isinstance(node.index, ConstIndex):
                    idx = node.index.value
                elif isinstance(node.index, EnumIndex):
                    idx = node.index.label
                else:
                    raise TransformError(
                        f"cannot ungroup {target.name!r}: parameterized reference"
                    )
                return Ref(
                    target.layout[idx], col_abs=node.col_abs, row_abs=node.row_abs
                )
            if isinstance(node, AttrRange) and node.attr == target.name:
                lo, hi = target.layout[node.lo], target.layout[node.hi]
                return RangeRef(
                    Ref(lo, col_abs=node.start_flags[0], row_abs=node.start_flags[1]),
                    Ref(hi, col_abs=node.end_flags[0], row_abs=node.end_flags[1]),
                )
            return None

        return _map_exprs(e, sub)

    return _rewrite_model_exprs(list(m.attributes), fn)


def apply_ungroup(m: Model, t: Ungroup) -> Model:
    """Split an attribute back into single-cell attributes named by address."""
    attr = m.attribute(t.name)
    if attr is None:
        raise TransformError(f"unknown attribute {t.name!r}")
    multi = len({a.sheet for x in m.attributes for a in x.cells}
                | {a.sheet for x in m.attributes for a, _ in x.label_meta}) > 1
    used = set(m.names()) - {attr.name}
    singles: list[Attribute] = []
    for i in attr.indices:
        name = _fresh_name(_address_name(attr.layout[i], multi), used)
        used.add(name)
        singles.append(_single_cell_attribute(name, attr.layout[i], attr.exprs[i]))
    for addr, text in attr.label_meta:
        name = _fresh_name(_address_name(addr, multi), used)
        used.add(name)
        singles.append(_single_cell_attribute(name, addr, Str(text)))

    position = m.attributes.index(attr)
    attrs = (
        list(m.attributes[:position]) + singles + list(m.attributes[position + 1 :])
    )
    return Model(tuple(_dissolve_refs(Model(tuple(attrs)), attr)))


def _label_candidate(m: Model, attr: Attribute, fb: FactBase) -> tuple[str, Address] | None:
    first = attr.first_cell()
    for cand in (
        Address(first.sheet, first.col, first.row - 1) if first.row > 1 else None,
        Address(first.sheet, first.col - 1, first.row) if first.col > 1 else None,
    ):
        if cand is None or not is_label(fb, cand):
            continue
        content = fb.wb.cells.get(cand)
        if not isinstance(content, Text):
            continue
        name = sanitize_identifier(content.value)
        if name:
            return name, cand
    return None


def infer_name(m: Model, attr_name: str, fb: FactBase) -> str | None:
    """Suggest a name from the label above (else left of) the first cell."""
    attr = m.attribute(attr_name)
    if attr is None:
        raise TransformError(f"unknown attribute {attr_name!r}")
    found = _label_candidate(m, attr, fb)
    return found[0] if found else None


def apply_name_from_label(
    m: Model, t: NameFromLabel, fb: FactBase
) -> tuple[Model, str | None]:
    """Rename after the neighbouring label and absorb the label's attribute.

    Returns the new model and a diagnostic when nothing could be done
    (no adjacent label, or the label cell is not a single-cell attribute).
    """
    attr = m.attribute(t.name)
    if attr is None:
        raise TransformError(f"unknown attribute {t.name!r}")
    found = _label_candidate(m, attr, fb)
    if found is None:
        return m, f"no adjacent label for {t.name!r}"
    base, label_addr = found
    label_attr = next(
        (
            a
            for a in m.attributes
            if a.size == 1 and a.first_cell() == label_addr
        ),
        None,
    )
    if label_attr is None:
        return m, f"label cell {label_addr!r} is not a single-cell attribute"
    content = fb.wb.cells[label_addr]
    assert isinstance(content, Text)

    # drop the label attribute (restoring any references to it), then rename
    dissolved = _dissolve_refs(m, label_attr)
    attrs = [a for a in dissolved if a.name != label_attr.name]
    remaining = Model(tuple(attrs))
    new_name = _fresh_name(base, set(remaining.names()) - {t.name})
    renamed = apply_rename(remaining, Rename(t.name, new_name))
    final_attr = renamed.attribute(new_name)
    assert final_attr is not None
    amended = replace(
        final_attr, label_meta=final_attr.label_meta + ((label_addr, content.value),)
    )
    return (
        Model(tuple(amended if a.name == new_name else a for a in renamed.attributes)),
        None,
    )


def apply_transform(m: Model, t: Transform, fb: FactBase) -> tuple[Model, str | None]:
    """Apply one transform; returns the new model and an optional diagnostic."""
    if isinstance(t, Group):
        return apply_group(m, t), None
    if isinstance(t, Rename):
        return apply_rename(m, t), None
    if isinstance(t, Ungroup):
        return apply_ungroup(m, t), None
    if isinstance(t, NameFromLabel):
        return apply_name_from_label(m, t, fb)
    raise TransformError(f"unknown transform {t!r}")


# === match -> transforms ==============================================

def match_to_transforms(matches: list[Match], fb: FactBase) -> list[Transform]:
    """Turn selected matches into Group steps plus naming steps.

    Each rule instance with bound non-label cells becomes one Group named
    after the rule (numbered from the second occurrence on); label cells
    are left alone so the subsequent NameFromLabel steps can absorb them.
    """
    counts: dict[str, int] = {}
    groups: list[Group] = []
    for match in matches:
        for rule_name, addrs in match.bindings:
            cells: dict[Address, None] = {}
            for a in addrs:
                if not is_label(fb, a):
                    cells.setdefault(a)
            if not cells:
                continue
            counts[rule_name] = counts.get(rule_name, 0) + 1
            n = counts[rule_name]
            gname = rule_name if n == 1 else f"{rule_name}_{n}"
            groups.append(Group(tuple(cells), gname))
    transforms: list[Transform] = list(groups)
    transforms.extend(NameFromLabel(g.name) for g in groups)
    return transforms


# === generalization ===================================================

def _has_plain_refs(e: Expr) -> bool:
    found = False

    def fn(node: Expr) -> Expr | None:
        nonlocal found
        if isinstance(node, (Ref, RangeRef)):
            found = True
        return None

    _map_exprs(e, fn)
    return found


def _parameterize(e: Expr) -> Expr:
    def fn(node: Expr) -> Expr | None:
        if isinstance(node, AttrRef) and isinstance(node.index, ConstIndex):
            return replace(node, index=ParamIndex(node.index.value - 1))
        return None

    return _map_exprs(e, fn)


def instantiate_template(template: Expr, i: int) -> Expr:
    """Substitute the index parameter: every ``t+k`` becomes the number i+k."""

    def fn(node: Expr) -> Expr | None:
        if isinstance(node, AttrRef) and isinstance(node.index, ParamIndex):
            return replace(node, index=ConstIndex(i + node.index.offset))
        return None

    return _map_exprs(template, fn)


def generalize(m: Model, attr_name: str) -> Expr | None:
    """A template T(t) with exprs(i) = T(i) for all i, or None if there is none.

    Only array (1..n) attributes generalize.  Expressions must already be
    in attribute-reference form; plain cell references are an error asking
    for further grouping.
    """
    attr = m.attribute(attr_name)
    if attr is None:
        raise TransformError(f"unknown attribute {attr_name!r}")
    if not isinstance(attr.domain, RangeDomain):
        return None
    for i in attr.indices:
        if _has_plain_refs(attr.exprs[i]):
            raise TransformError(
                f"{attr_name}[{i}] still references ungrouped cells; "
                "group them first"
            )
    template = _parameterize(attr.exprs[1])
    for i in attr.indices:
        if instantiate_template(template, i) != attr.exprs[i]:
            return None
    return template


# === MM emission ======================================================

def _signature(attr: Attribute) -> str:
    if isinstance(attr.domain, EnumDomain):
        return f"{attr.name}{{{','.join(attr.domain.labels)}}}"
    if attr.domain.n == 1:
        return attr.name
    return f"{attr.name}[1..{attr.domain.n}]"


def _is_data(attr: Attribute) -> bool:
    return all(isinstance(e, (Num, Str)) for e in attr.exprs.values())


def _equations(m: Model, attr: Attribute) -> list[str]:
    if _is_data(attr):
        return []
    if isinstance(attr.domain, RangeDomain) and attr.domain.n > 1:
        try:
            template = generalize(m, attr.name)
        except TransformError:
            template = None
        if template is not None:
            return [f"{attr.name}[all t] = {render_expr(template)}"]
    lines = []
    for i in attr.indices:
        head = attr.name if attr.size == 1 else f"{attr.name}[{i}]"
        lines.append(f"{head} = {render_expr(attr.exprs[i])}")
    return lines


def emit_mm(m: Model) -> str:
    """The MM listing: signature line, then ``where`` and one equation per line.

    Output is byte-deterministic: single spaces between signatures,
    ``where`` on its own line, LF endings, attributes in model order.
    """
    lines = ["<" + " ".join(_signature(a) for a in m.attributes) + ">"]
    equations = [eq for a in m.attributes for eq in _equations(m, a)]
    if equations:
        lines.append("where")
        lines.extend(equations)
    return "\n".join(lines) + "\n"


def model_summary(m: Model) -> dict:
    """A JSON-ready description of the model (names, domains, cells, equations)."""
    attrs = []
    for a in m.attributes:
        if isinstance(a.domain, EnumDomain):
            domain: dict = {"kind": "enum", "labels": list(a.domain.labels)}
        else:
            domain = {"kind": "range", "n": a.domain.n}
        attrs.append(
            {
                "name": a.name,
                "domain": domain,
                "cells": [repr(a.layout[i]) for i in a.indices],
                "equations": _equations(m, a),
                "absorbed_labels": [
                    {"cell": repr(addr), "text": text} for addr, text in a.label_meta
                ],
            }
        )
    return {"attributes": attrs}
