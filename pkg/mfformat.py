#!/usr/bin/env python3
"""
The mf-format document: a ring, a potential, named factorisations and named maps
Line-oriented text with section headers, plus a JSON mirror of the same structure
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from config import ORDERS, settings
from errors import MFError, ParseError
from matrices import PolyMatrix
from mfcore import MatrixFactorisation, MFMap, make_mf
from polyring import Polynomial, RingContext, parse_polynomial

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER = f"mf-format: {FORMAT_VERSION}"


@dataclass
class MFDocument:
    ctx: RingContext
    potential: Polynomial
    factorisations: Dict[str, MatrixFactorisation] = field(default_factory=dict)
    maps: Dict[str, MFMap] = field(default_factory=dict)

    def factorisation(self, name: Optional[str] = None) -> MatrixFactorisation:
        """The named factorisation, or the only one when no name is given"""
        if name is None:
            if len(self.factorisations) != 1:
                raise ParseError(f"Document holds {len(self.factorisations)} factorisations; name one")
            return next(iter(self.factorisations.values()))
        if name not in self.factorisations:
            raise ParseError(f"No factorisation named {name!r}")
        return self.factorisations[name]

    def map(self, name: str) -> MFMap:
        if name not in self.maps:
            raise ParseError(f"No map named {name!r}")
        return self.maps[name]


# -- arrays --

def _split_array(text: str, line: int) -> List[List[str]]:
    """'[[a, b], [c, d]]' -> [['a', 'b'], ['c', 'd']]; entries are left as polynomial strings"""
    text = text.strip()
    if not (text.startswith('[') and text.endswith(']')):
        raise ParseError("Expected a bracketed array", position=line)
    inner = text[1:-1].strip()
    rows = []
    depth = 0
    start = None
    for i, ch in enumerate(inner):
        if ch == '[':
            if depth:
                raise ParseError("Arrays nest at most two levels", position=line)
            depth = 1
            start = i + 1
        elif ch == ']':
            if not depth:
                raise ParseError("Unbalanced ']'", position=line)
            depth = 0
            body = inner[start:i].strip()
            rows.append([e.strip() for e in body.split(',')] if body else [])
        elif depth == 0 and ch not in ', \t':
            raise ParseError(f"Unexpected {ch!r} between rows", position=line)
    if depth:
        raise ParseError("Unbalanced '['", position=line)
    for row in rows:
        if any(not e for e in row):
            raise ParseError("Empty array entry", position=line)
    return rows


def _format_array(matrix: PolyMatrix) -> str:
    return '[' + ', '.join('[' + ', '.join(str(e) for e in row) + ']' for row in matrix.rows) + ']'


def _matrix(ctx: RingContext, rows: List[List[str]], shape: Tuple[int, int], what: str, line: int) -> PolyMatrix:
    nrows, ncols = shape
    if nrows == 0 or ncols == 0:
        if any(rows):
            raise ParseError(f"{what} must be empty for shape {shape}", position=line)
        return PolyMatrix.zeros(ctx, nrows, ncols)
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise ParseError(f"{what} must be {nrows}x{ncols}", position=line)
    parsed = []
    for r, row in enumerate(rows):
        out = []
        for c, text in enumerate(row):
            try:
                out.append(parse_polynomial(text, ctx))
            except ParseError as exc:
                raise ParseError(f"{what} entry ({r},{c}): {exc}", position=line) from exc
        parsed.append(out)
    return PolyMatrix(ctx, parsed, shape)


# -- text format --

def _sections(text: str) -> List[Tuple[str, Optional[str], int, List[Tuple[int, str]]]]:
    lines = text.splitlines()
    body = [(i + 1, line.split('#', 1)[0].strip()) for i, line in enumerate(lines)]
    body = [(n, line) for n, line in body if line]
    if not body or body[0][1].replace(' ', '') != HEADER.replace(' ', ''):
        raise ParseError(f"Documents must start with '{HEADER}'", position=body[0][0] if body else 1)
    sections = []
    for n, line in body[1:]:
        if line.startswith('['):
            if not line.endswith(']'):
                raise ParseError(f"Malformed section header {line!r}", position=n)
            parts = line[1:-1].split()
            if not parts or len(parts) > 2:
                raise ParseError(f"Malformed section header {line!r}", position=n)
            sections.append((parts[0], parts[1] if len(parts) == 2 else None, n, []))
        else:
            if not sections:
                raise ParseError("Content before the first section", position=n)
            sections[-1][3].append((n, line))
    return sections


def _fields(lines: List[Tuple[int, str]], allowed: Tuple[str, ...]) -> Dict[str, Tuple[int, str]]:
    out = {}
    for n, line in lines:
        if ':' not in line:
            raise ParseError(f"Expected 'key: value', got {line!r}", position=n)
        key, value = line.split(':', 1)
        key = key.strip()
        if key not in allowed:
            raise ParseError(f"Unknown key {key!r}", position=n)
        if key in out:
            raise ParseError(f"Duplicate key {key!r}", position=n)
        out[key] = (n, value.strip())
    return out


def _require(fields, key, line):
    if key not in fields:
        raise ParseError(f"Missing key {key!r}", position=line)
    return fields[key]


def _ring(fields, line, order=None, characteristic=None) -> RingContext:
    n, names = _require(fields, 'variables', line)
    variables = [v.strip() for v in names.split(',') if v.strip()]
    if order is None:
        order = fields.get('order', (line, settings.order))[1]
    if order not in ORDERS:
        raise ParseError(f"Unknown monomial order {order!r}", position=fields.get('order', (line,))[0])
    if characteristic is None:
        raw = fields.get('characteristic', (line, str(settings.characteristic)))
        try:
            characteristic = int(raw[1])
        except ValueError as exc:
            raise ParseError(f"Characteristic {raw[1]!r} is not an integer", position=raw[0]) from exc
    try:
        return RingContext(variables, characteristic, order)
    except (ValueError, MFError) as exc:
        raise ParseError(str(exc), position=n) from exc


def parse_document(text: str, order: Optional[str] = None, characteristic: Optional[int] = None) -> MFDocument:
    """Parse and validate a document; order and characteristic override the [ring] block"""
    sections = _sections(text)
    ctx = None
    potential = None
    pending_maps = []
    doc = None
    for kind, name, line, lines in sections:
        if kind == 'ring':
            ctx = _ring(_fields(lines, ('variables', 'order', 'characteristic')), line, order, characteristic)
        elif kind == 'potential':
            if ctx is None:
                raise ParseError("[potential] must follow [ring]", position=line)
            if len(lines) != 1:
                raise ParseError("[potential] holds exactly one polynomial", position=line)
            potential = parse_polynomial(lines[0][1], ctx)
            doc = MFDocument(ctx, potential)
        elif kind == 'factorisation':
            if doc is None:
                raise ParseError("[factorisation] must follow [potential]", position=line)
            if not name or name in doc.factorisations:
                raise ParseError(f"Factorisation needs a unique name, got {name!r}", position=line)
            fields = _fields(lines, ('ranks', 'd0', 'd1'))
            n, ranks_text = _require(fields, 'ranks', line)
            try:
                r0, r1 = (int(r) for r in ranks_text.split(','))
            except ValueError as exc:
                raise ParseError(f"Ranks must be 'r0, r1', got {ranks_text!r}", position=n) from exc
            n0, d0_text = _require(fields, 'd0', line)
            n1, d1_text = _require(fields, 'd1', line)
            d0 = _matrix(ctx, _split_array(d0_text, n0), (r1, r0), 'd0', n0)
            d1 = _matrix(ctx, _split_array(d1_text, n1), (r0, r1), 'd1', n1)
            doc.factorisations[name] = make_mf(ctx, potential, d0, d1, (r0, r1))
        elif kind == 'map':
            if doc is None:
                raise ParseError("[map] must follow [potential]", position=line)
            fields = _fields(lines, ('source', 'target', 'parity', 'matrix'))
            pending_maps.append((name, line, fields))
        else:
            raise ParseError(f"Unknown section [{kind}]", position=line)
    if doc is None:
        raise ParseError("Document needs [ring] and [potential] sections", position=1)
    for name, line, fields in pending_maps:
        if not name or name in doc.maps:
            raise ParseError(f"Map needs a unique name, got {name!r}", position=line)
        source = doc.factorisation(_require(fields, 'source', line)[1])
        target = doc.factorisation(_require(fields, 'target', line)[1])
        parity = int(fields.get('parity', (line, '0'))[1]) % 2
        n, text_rows = _require(fields, 'matrix', line)
        matrix = _matrix(ctx, _split_array(text_rows, n), (target.rank, source.rank), 'matrix', n)
        doc.maps[name] = MFMap(source, target, parity, matrix)
    logger.debug(f"Parsed document with {len(doc.factorisations)} factorisations and {len(doc.maps)} maps")
    return doc


def _names_of(doc: MFDocument, X: MatrixFactorisation) -> str:
    for name, Y in doc.factorisations.items():
        if Y is X or Y == X:
            return name
    raise ParseError("Map refers to a factorisation outside the document")


def print_document(doc: MFDocument) -> str:
    ctx = doc.ctx
    out = [HEADER, '', '[ring]', f"variables: {', '.join(ctx.variables)}", f"order: {ctx.order}",
           f"characteristic: {ctx.characteristic}", '', '[potential]', str(doc.potential)]
    for name, X in doc.factorisations.items():
        out += ['', f'[factorisation {name}]', f"ranks: {X.rank0}, {X.rank1}",
                f"d0: {_format_array(X.d0)}", f"d1: {_format_array(X.d1)}"]
    for name, f in doc.maps.items():
        out += ['', f'[map {name}]', f"source: {_names_of(doc, f.source)}", f"target: {_names_of(doc, f.target)}",
                f"parity: {f.parity}", f"matrix: {_format_array(f.matrix)}"]
    return '\n'.join(out) + '\n'


def single_document(X: MatrixFactorisation, name: str = 'X') -> MFDocument:
    return MFDocument(X.ctx, X.potential, {name: X})


# -- JSON mirror --

def _rows(matrix: PolyMatrix) -> List[List[str]]:
    return [[str(e) for e in row] for row in matrix.rows]


def document_to_json(doc: MFDocument) -> dict:
    ctx = doc.ctx
    return {
        'format': FORMAT_VERSION,
        'ring': {'variables': list(ctx.variables), 'order': ctx.order, 'characteristic': ctx.characteristic},
        'potential': str(doc.potential),
        'factorisations': {name: {'ranks': [X.rank0, X.rank1], 'd0': _rows(X.d0), 'd1': _rows(X.d1)}
                           for name, X in doc.factorisations.items()},
        'maps': {name: {'source': _names_of(doc, f.source), 'target': _names_of(doc, f.target),
                        'parity': f.parity, 'matrix': _rows(f.matrix)} for name, f in doc.maps.items()},
    }


def document_from_json(data: dict) -> MFDocument:
    if data.get('format') != FORMAT_VERSION:
        raise ParseError(f"Unsupported format version {data.get('format')!r}")
    ring = data['ring']
    ctx = RingContext(ring['variables'], ring.get('characteristic', settings.characteristic),
                      ring.get('order', settings.order))
    potential = parse_polynomial(data['potential'], ctx)
    doc = MFDocument(ctx, potential)
    for name, entry in data.get('factorisations', {}).items():
        r0, r1 = entry['ranks']
        d0 = _matrix(ctx, entry['d0'], (r1, r0), 'd0', 0)
        d1 = _matrix(ctx, entry['d1'], (r0, r1), 'd1', 0)
        doc.factorisations[name] = make_mf(ctx, potential, d0, d1, (r0, r1))
    for name, entry in data.get('maps', {}).items():
        source = doc.factorisation(entry['source'])
        target = doc.factorisation(entry['target'])
        matrix = _matrix(ctx, entry['matrix'], (target.rank, source.rank), 'matrix', 0)
        doc.maps[name] = MFMap(source, target, entry.get('parity', 0), matrix)
    return doc


def dumps_json(doc: MFDocument) -> str:
    return json.dumps(document_to_json(doc), indent=2, sort_keys=True)


def load_document(path: str, order: Optional[str] = None, characteristic: Optional[int] = None) -> MFDocument:
    with open(path, 'r', encoding='utf-8') as handle:
        text = handle.read()
    if path.endswith('.json'):
        return document_from_json(json.loads(text))
    try:
        return parse_document(text, order, characteristic)
    except ParseError as exc:
        exc.source = path
        raise
