"""Minimal XLSX reader: worksheets, shared strings, sheet state, external links.

Charts, drawings, pivot tables and styles are ignored.  Macro and dialog
sheets and binary (xlsb) workbooks raise :class:`UnsupportedFeature`.
"""

from __future__ import annotations

import posixpath
import re
import zipfile
from urllib.parse import unquote
from xml.etree import ElementTree as ET

from ..addr import ExternalAddr, parse_a1
from ..formula import FormulaSyntaxError, parse, print_formula, translate
from ..formula.analysis import TranslationError
from ..values import ErrorCode
from .model import Cell, Sheet, Visibility, Workbook


class XlsxError(ValueError):
    pass


class NotAnArchive(XlsxError):
    pass


class MalformedWorkbookXml(XlsxError):
    def __init__(self, part: str, detail: str):
        self.part = part
        self.detail = detail
        super().__init__(f"{part}: {detail}")


class UnsupportedFeature(XlsxError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unsupported workbook feature: {name}")


_STATES = {
    "visible": Visibility.VISIBLE,
    "hidden": Visibility.HIDDEN,
    "veryHidden": Visibility.VERY_HIDDEN,
}
_WORKSHEET_REL = "/worksheet"
_SKIPPED_SHEET_RELS = ("/chartsheet",)
_UNSUPPORTED_SHEET_RELS = ("/macrosheet", "/dialogsheet", "/xlMacrosheet", "/xlIntlMacrosheet")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _rel_id(elem) -> str | None:
    for key, value in elem.attrib.items():
        if _local(key) == "id" and key.startswith("{"):
            return value
    return None


class _Package:
    def __init__(self, zf: zipfile.ZipFile):
        self.zf = zf
        self.names = set(zf.namelist())

    def xml(self, part: str):
        try:
            data = self.zf.read(part)
        except KeyError:
            raise MalformedWorkbookXml(part, "part is missing") from None
        try:
            return ET.fromstring(data)
        except ET.ParseError as exc:
            raise MalformedWorkbookXml(part, str(exc)) from None

    def rels(self, part: str) -> dict[str, tuple[str, str]]:
        """``{rId: (type, absolute target)}`` for ``part``."""
        folder, name = posixpath.split(part)
        rels_part = posixpath.join(folder, "_rels", name + ".rels")
        if rels_part not in self.names:
            return {}
        out = {}
        for rel in self.xml(rels_part):
            target = rel.get("Target", "")
            if rel.get("TargetMode") != "External":
                target = target.lstrip("/") if target.startswith("/") else posixpath.normpath(posixpath.join(folder, target))
            out[rel.get("Id")] = (rel.get("Type", ""), target)
        return out


def _text(elem) -> str:
    """Concatenated text of ``<t>`` descendants (shared strings, rich runs)."""
    return "".join(t.text or "" for t in elem.iter() if _local(t.tag) == "t" and not _in_phonetic(elem, t))


def _in_phonetic(root, target) -> bool:
    for rph in root.iter():
        if _local(rph.tag) == "rPh" and any(x is target for x in rph.iter()):
            return True
    return False


def _external_books(pkg: _Package, wb_root, wb_rels) -> tuple[list[str], dict]:
    books, values = [], {}
    for ref in wb_root.iter():
        if _local(ref.tag) != "externalReference":
            continue
        rel = wb_rels.get(_rel_id(ref))
        if rel is None:
            raise MalformedWorkbookXml("xl/workbook.xml", "externalReference without relationship")
        part = rel[1]
        book = None
        for rtype, target in pkg.rels(part).values():
            if rtype.endswith("/externalLinkPath") or rtype.endswith("/xlExternalLinkPath/xlPathMissing"):
                book = posixpath.basename(unquote(target.replace("\\", "/")))
        root = pkg.xml(part)
        if book is None:
            book = f"External{len(books) + 1}"
        books.append(book)
        sheet_names = [e.get("val") for e in root.iter() if _local(e.tag) == "sheetName"]
        for data in root.iter():
            if _local(data.tag) != "sheetData":
                continue
            idx = int(data.get("sheetId", "0"))
            if idx >= len(sheet_names):
                continue
            for cell in data.iter():
                if _local(cell.tag) != "cell":
                    continue
                v = next((x for x in cell if _local(x.tag) == "v"), None)
                if v is None or v.text is None:
                    continue
                row, col = parse_a1(cell.get("r"))
                values[ExternalAddr(book, sheet_names[idx], row, col)] = _typed(cell.get("t", "n"), v.text, [])
    return books, values


_EXT_INDEX_RE = re.compile(r"\[(\d+)\]")


def _resolve_external_indices(text: str, books: list[str]) -> str:
    def sub(m):
        i = int(m.group(1)) - 1
        return f"[{books[i]}]" if 0 <= i < len(books) else m.group(0)

    out = []
    # Only rewrite outside string literals.
    for chunk in re.split(r'("(?:[^"]|"")*")', text):
        out.append(chunk if chunk.startswith('"') else _EXT_INDEX_RE.sub(sub, chunk))
    text = "".join(out)
    # [Book]Sheet!A1 needs quoting once the book name contains spaces.
    return re.sub(
        r"(?<!')\[([^\]]*[ ][^\]]*)\]([A-Za-z0-9_.]+)!",
        lambda m: "'[" + m.group(1) + "]" + m.group(2) + "'!",
        text,
    )


def _typed(t: str, raw: str, shared: list[str]):
    if t == "s":
        return shared[int(raw)]
    if t in ("str", "inlineStr"):
        return raw
    if t == "b":
        return raw.strip() in ("1", "true")
    if t == "e":
        return ErrorCode.parse(raw)
    return float(raw)


def load_xlsx(path) -> Workbook:
    try:
        zf = zipfile.ZipFile(path)
    except (zipfile.BadZipFile, OSError) as exc:
        raise NotAnArchive(f"{path}: {exc}") from None
    with zf:
        pkg = _Package(zf)
        if "xl/workbook.bin" in pkg.names:
            raise UnsupportedFeature("binary workbook (xlsb)")
        if "xl/workbook.xml" not in pkg.names:
            raise MalformedWorkbookXml("xl/workbook.xml", "part is missing")
        wb_root = pkg.xml("xl/workbook.xml")
        wb_rels = pkg.rels("xl/workbook.xml")
        shared = []
        for rtype, target in wb_rels.values():
            if rtype.endswith("/sharedStrings") and target in pkg.names:
                shared = [_text(si) for si in pkg.xml(target) if _local(si.tag) == "si"]
        books, external_values = _external_books(pkg, wb_root, wb_rels)
        sheets = []
        for el in wb_root.iter():
            if _local(el.tag) != "sheet":
                continue
            rtype, target = wb_rels.get(_rel_id(el), ("", ""))
            if any(rtype.endswith(s) for s in _UNSUPPORTED_SHEET_RELS):
                raise UnsupportedFeature(f"sheet type {rtype.rsplit('/', 1)[-1]}")
            if any(rtype.endswith(s) for s in _SKIPPED_SHEET_RELS):
                continue
            if not rtype.endswith(_WORKSHEET_REL):
                raise MalformedWorkbookXml("xl/workbook.xml", f"sheet {el.get('name')!r} has no worksheet part")
            state = el.get("state", "visible")
            if state not in _STATES:
                raise MalformedWorkbookXml("xl/workbook.xml", f"unknown sheet state {state!r}")
            cells = _read_sheet(pkg, target, shared, books)
            sheets.append(Sheet(el.get("name"), cells, _STATES[state]))
        if not sheets:
            raise MalformedWorkbookXml("xl/workbook.xml", "no worksheets")
        defined = {}
        for el in wb_root.iter():
            if _local(el.tag) == "definedName" and el.get("localSheetId") is None and el.text:
                defined[el.get("name")] = _resolve_external_indices(el.text, books)
    name = posixpath.basename(str(path))
    return Workbook(tuple(sheets), name, defined, external_values)


def _read_sheet(pkg: _Package, part: str, shared: list[str], books: list[str]) -> dict:
    root = pkg.xml(part)
    cells = {}
    masters: dict[str, tuple[int, int, object]] = {}
    for c in root.iter():
        if _local(c.tag) != "c":
            continue
        ref = c.get("r")
        if ref is None:
            raise MalformedWorkbookXml(part, "cell without r attribute")
        try:
            row, col = parse_a1(ref)
        except ValueError as exc:
            raise MalformedWorkbookXml(part, str(exc)) from None
        t = c.get("t", "n")
        f_el = v_el = is_el = None
        for child in c:
            tag = _local(child.tag)
            if tag == "f":
                f_el = child
            elif tag == "v":
                v_el = child
            elif tag == "is":
                is_el = child
        try:
            if t == "inlineStr":
                value = _text(is_el) if is_el is not None else None
            else:
                value = _typed(t, v_el.text, shared) if v_el is not None and v_el.text is not None else None
        except (ValueError, IndexError) as exc:
            raise MalformedWorkbookXml(part, f"cell {ref}: {exc}") from None
        text = _formula_text(f_el, row, col, masters, books)
        if text is None and value is None:
            continue
        if isinstance(value, str) and value == "" and text is None:
            continue
        cells[(row, col)] = Cell(value, text)
    return cells


def _formula_text(f_el, row: int, col: int, masters: dict, books: list[str]) -> str | None:
    if f_el is None:
        return None
    body = f_el.text
    if f_el.get("t") == "shared":
        si = f_el.get("si")
        if body:
            text = "=" + _resolve_external_indices(body, books)
            try:
                masters[si] = (row, col, parse(text))
            except FormulaSyntaxError:
                masters[si] = (row, col, None)
            return text
        master = masters.get(si)
        if master is None or master[2] is None:
            return None
        mrow, mcol, ast = master
        try:
            return print_formula(translate(ast, row - mrow, col - mcol))
        except TranslationError:
            return "=#REF!"
    if not body:
        return None
    return "=" + _resolve_external_indices(body, books)
