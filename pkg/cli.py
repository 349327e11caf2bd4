#!/usr/bin/env python3
"""
Command-line front end for the matrix-factorisation toolkit
Reads mf-format documents, prints deterministic reports and maps errors to exit codes
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from chern import cardy_check, chern_character, chern_of_pushforward_routes, euler_chi_residue, jacobi_algebra
from config import ORDERS, settings
from connection import TAdicFrame, koszul_retract, spanning_forms
from convolution import (Kernel, chern_convolution, convolution_kernel, convolve, knorrer_kappa_check, knorrer_phi,
                         knorrer_psi_model)
from database import ResultCache, cache_key
from errors import MFError, ParseError, VerificationFailed
from mfcore import (MatrixFactorisation, dual, extend_scalars, hom, is_morphism, make_mf, tensor)
from mfformat import MFDocument, dumps_json, document_to_json, load_document, print_document, single_document
from polyring import RingContext, parse_polynomial
from pushforward import (check_idempotent, default_homotopies, e_via_perturbation, idempotent,
                         split_over_point)
from residue import ResidueQuery, residue_trace, residue_transform

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFICATION = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Report:
    """Text lines and the JSON payload carrying the same values"""
    lines: List[str]
    data: Dict = field(default_factory=dict)
    code: int = EXIT_OK
    document: Optional[MFDocument] = None


# -- loading --

def _split_ref(ref: str) -> Tuple[str, Optional[str]]:
    """'file.mf:NAME' -> ('file.mf', 'NAME')"""
    path, sep, name = ref.rpartition(':')
    if sep and path and name and '/' not in name and '\\' not in name:
        return path, name
    return ref, None


def _load(args, ref: str) -> Tuple[MFDocument, MatrixFactorisation]:
    path, name = _split_ref(ref)
    doc = load_document(path, args.order, args.char)
    return doc, doc.factorisation(name)


def _common_context(X: MatrixFactorisation, Y: MatrixFactorisation) -> Tuple[MatrixFactorisation, MatrixFactorisation]:
    if X.ctx == Y.ctx:
        return X, Y
    ctx = X.ctx.extend(Y.ctx.variables)
    return extend_scalars(X, ctx), extend_scalars(Y, ctx)


def _names(text: Optional[str]) -> List[str]:
    return [v.strip() for v in text.split(',') if v.strip()] if text else []


def _polys(text: Optional[str], ctx: RingContext):
    return [parse_polynomial(p, ctx) for p in _names(text)]


def _weights(args) -> Optional[Tuple[int, ...]]:
    if not args.weights:
        return None
    try:
        return tuple(int(w) for w in _names(args.weights))
    except ValueError as exc:
        raise UsageError(f"--weights must be comma-separated integers, got {args.weights!r}") from exc


def _degree_bound(args) -> Optional[int]:
    return args.degree_bound if args.degree_bound is not None else settings.degree_bound


def _frame(args, X: MatrixFactorisation) -> TAdicFrame:
    yvars = _names(args.y)
    if not yvars:
        raise UsageError("--y names the integrated variables")
    tgens = _polys(args.t, X.ctx) or [X.potential.derivative(v) for v in yvars]
    return TAdicFrame(X.ctx, yvars, tgens, weights=_weights(args))


# -- commands --

def cmd_check(args) -> Report:
    path, name = _split_ref(args.document)
    doc = load_document(path, args.order, args.char)
    names = [name] if name else list(doc.factorisations)
    lines, data = [], {'potential': str(doc.potential), 'factorisations': {}, 'maps': {}}
    for n in names:
        X = doc.factorisation(n)
        lines.append(f"✅ {n}: d^2 = ({doc.potential})*I verified, ranks ({X.rank0}, {X.rank1})")
        data['factorisations'][n] = {'ranks': [X.rank0, X.rank1], 'verified': True}
    for n, f in doc.maps.items():
        morphism = is_morphism(f)
        lines.append(f"{'✅' if morphism else '⚠️'} map {n}: parity {f.parity}, "
                     f"{'commutes with d' if morphism else 'does not commute with d'}")
        data['maps'][n] = {'parity': f.parity, 'morphism': morphism}
    return Report(lines, data)


def _document_report(doc: MFDocument) -> Report:
    return Report(print_document(doc).rstrip('\n').split('\n'), document_to_json(doc), document=doc)


def cmd_tensor(args) -> Report:
    X, Y = _common_context(_load(args, args.left)[1], _load(args, args.right)[1])
    return _document_report(single_document(tensor(X, Y), 'T'))


def cmd_dual(args) -> Report:
    return _document_report(single_document(dual(_load(args, args.document)[1]), 'D'))


def cmd_hom(args) -> Report:
    X, Y = _common_context(_load(args, args.left)[1], _load(args, args.right)[1])
    return _document_report(single_document(hom(X, Y), 'H'))


def cmd_milnor(args) -> Report:
    path, _ = _split_ref(args.document)
    doc = load_document(path, args.order, args.char)
    algebra = jacobi_algebra(doc.potential)
    basis = [str(b) for b in algebra.basis_polynomials()]
    return Report([f"mu = {algebra.dim}", f"basis: {', '.join(basis)}"], {'mu': algebra.dim, 'basis': basis})


def cmd_residue(args) -> Report:
    path, _ = _split_ref(args.document)
    doc = load_document(path, args.order, args.char)
    ctx = doc.ctx
    yvars = _names(args.y) or list(ctx.variables)
    tgens = _polys(args.t, ctx) or [doc.potential.derivative(v) for v in yvars]
    frame = TAdicFrame(ctx, yvars, tgens, weights=_weights(args))
    query = ResidueQuery(frame, parse_polynomial(args.s, ctx), tuple(_polys(args.r, ctx)))
    value = residue_trace(query)
    if args.cross_check:
        other = residue_transform(query.s, frame, query.rs)
        if other != value:
            raise VerificationFailed(f"Residue routes disagree: {value} vs {other}")
    return Report([str(value)], {'value': str(value)})


def cmd_chern(args) -> Report:
    value = chern_character(_load(args, args.document)[1])
    return Report([str(value)], {'value': str(value)})


def cmd_euler(args) -> Report:
    value = euler_chi_residue(_load(args, args.left)[1], _load(args, args.right)[1])
    return Report([str(value)], {'value': str(value)})


def cmd_cardy(args) -> Report:
    left_doc, X = _load(args, args.left)
    right_doc, Y = _load(args, args.right)
    alpha = left_doc.map(args.alpha) if args.alpha else None
    beta = right_doc.map(args.beta) if args.beta else None
    lhs, rhs = cardy_check(X, Y, alpha, beta)
    agrees = lhs == rhs
    lines = [f"trace side: {lhs}", f"residue side: {rhs}", f"{'✅ agree' if agrees else '❌ disagree'}"]
    return Report(lines, {'trace': str(lhs), 'residue': str(rhs), 'agree': agrees},
                  EXIT_OK if agrees else EXIT_VERIFICATION)


def cmd_pushforward(args) -> Report:
    _, X = _load(args, args.document)
    frame = _frame(args, X)
    model = idempotent(X, frame, default_homotopies(X, frame, _degree_bound(args)))
    record = check_idempotent(model, _degree_bound(args))
    base = model.base_ctx
    data = {
        'base': list(base.variables),
        'mu': frame.mu,
        'ranks': list(model.reduced.ranks),
        'strict': record.strict,
        'exact_idempotent': record.exact_idempotent,
        'homotopy_idempotent': record.homotopy_idempotent,
    }
    lines = [f"📊 base ring: k[{', '.join(base.variables)}], mu = {frame.mu}",
             f"model ranks: ({model.reduced.rank0}, {model.reduced.rank1})",
             f"e strict morphism: {'yes' if record.strict else 'no'}",
             f"e^2 = e: {'exact' if record.exact_idempotent else ('up to homotopy' if record.homotopy_idempotent else 'unverified')}"]
    if not base.nvars and not model.potential:
        split = split_over_point(model)
        data['split_dims'] = list(split.dims)
        lines.append(f"split dimensions: ({split.dims[0]}, {split.dims[1]})")
    doc = MFDocument(base, model.potential, {'M': model.reduced}, {'e': model.e})
    code = EXIT_OK if record.strict and record.homotopy_idempotent else EXIT_VERIFICATION
    return Report(lines, data, code, doc)


def cmd_fuse(args) -> Report:
    _, F_mf = _load(args, args.left)
    _, E_mf = _load(args, args.right)
    yvars = _names(args.y)
    if not yvars or not args.v:
        raise UsageError("fuse needs --y (middle variables) and --v (middle potential)")
    V = parse_polynomial(args.v, E_mf.ctx)
    x = [v for v in E_mf.ctx.variables if v not in yvars]
    z = [v for v in F_mf.ctx.variables if v not in yvars]
    E = Kernel(E_mf, x, yvars, V - E_mf.potential, V)
    V_F = V.embed(F_mf.ctx)
    F = Kernel(F_mf, yvars, z, V_F, F_mf.potential + V_F)
    model = convolve(F, E)
    record = check_idempotent(model, _degree_bound(args))
    data = {
        'mu': model.frame.mu,
        'ranks': list(model.reduced.ranks),
        'strict': record.strict,
        'homotopy_idempotent': record.homotopy_idempotent,
    }
    lines = [f"📊 fused over {', '.join(yvars)}: mu = {model.frame.mu}",
             f"model ranks: ({model.reduced.rank0}, {model.reduced.rank1})",
             f"e strict morphism: {'yes' if record.strict else 'no'}",
             f"e^2 = e up to homotopy: {'yes' if record.homotopy_idempotent else 'unverified'}"]
    code = EXIT_OK if record.strict and record.homotopy_idempotent else EXIT_VERIFICATION
    if model.base_ctx.nvars and model.base_ctx.nvars % 2 == 0:
        via_residue = chern_convolution(F, E)
        via_e, _ = chern_of_pushforward_routes(model)
        data['chern'] = str(via_residue)
        lines.append(f"ch(F * E) = {via_residue}")
        if via_e != via_residue:
            lines.append(f"❌ idempotent route gives {via_e}")
            code = EXIT_VERIFICATION
    fused = convolution_kernel(model, F, E)
    doc = MFDocument(model.base_ctx, fused.mf.potential, {'M': model.reduced}, {'e': model.e})
    return Report(lines, data, code, doc)


def cmd_knorrer(args) -> Report:
    _, X = _load(args, args.document)
    report = knorrer_kappa_check(X, args.u, args.v)
    checks = [('e = 1 (x) (1, 0, 0, -1) on k0k0\'', report.e_matches),
              ('kappa is a morphism', report.kappa_is_morphism),
              ('kappa g = 1', report.kappa_g_identity),
              ('kappa e = f', report.kappa_e_equals_f)]
    lines = [f"{'✅' if ok else '❌'} {label}" for label, ok in checks]
    data = {'e_matches': report.e_matches, 'kappa_is_morphism': report.kappa_is_morphism,
            'kappa_g_identity': report.kappa_g_identity, 'kappa_e_equals_f': report.kappa_e_equals_f}
    return Report(lines, data, EXIT_OK if report.ok else EXIT_VERIFICATION)


# -- selftest --

def _selftest_knorrer() -> bool:
    ctx = RingContext(['x'])
    x = ctx.var('x')
    for d in range(2, 6):
        for a in range(1, d):
            X = make_mf(ctx, x ** d, [[x ** (d - a)]], [[x ** a]])
            if not knorrer_kappa_check(X).ok:
                logger.error(f"Knorrer check failed for ({a}, {d})")
                return False
    return True


def _selftest_frames() -> List[TAdicFrame]:
    one = RingContext(['y'])
    two = RingContext(['y1', 'y2'])
    frames = []
    for V in ('y^2', 'y^3', 'y^4'):
        W = one.parse(V)
        frames.append(TAdicFrame(one, ['y'], [W.derivative('y')]))
    for V in ('y1^2 + y2^2', 'y1^3 + y2^3'):
        W = two.parse(V)
        frames.append(TAdicFrame(two, ['y1', 'y2'], [W.derivative('y1'), W.derivative('y2')]))
    return frames


def _selftest_contraction() -> bool:
    for frame in _selftest_frames():
        results = koszul_retract(frame).check_identities(spanning_forms(frame, 3))
        if not all(results.values()):
            logger.error(f"Contraction identities failed on {frame}: {results}")
            return False
    return True


def _selftest_residues() -> bool:
    for frame in _selftest_frames():
        for s in frame.basis:
            if residue_trace(ResidueQuery(frame, s)) != residue_transform(s, frame, frame.tgens):
                logger.error(f"Residue routes disagree on {s} for {frame}")
                return False
        if residue_trace(ResidueQuery(frame, frame.ctx.one())) != frame.base_ctx.constant(frame.mu):
            return False
    return True


def _selftest_routes() -> bool:
    ctx = RingContext(['x'])
    x = ctx.var('x')
    model = knorrer_psi_model(knorrer_phi(make_mf(ctx, x ** 3, [[x ** 2]], [[x]])))
    return model.e == e_via_perturbation(model.source, model.frame, model.lambdas)


SELFTESTS = (
    ('Knorrer idempotent and kappa', _selftest_knorrer),
    ('de Rham contraction identities', _selftest_contraction),
    ('residue trace = transformation law', _selftest_residues),
    ('closed form e = perturbation e', _selftest_routes),
)


def cmd_selftest(args) -> Report:
    lines, data = [], {}
    for label, test in SELFTESTS:
        ok = bool(test())
        lines.append(f"{'✅' if ok else '❌'} {label}")
        data[label] = ok
    return Report(lines, data, EXIT_OK if all(data.values()) else EXIT_VERIFICATION)


COMMANDS = {
    'check': cmd_check, 'tensor': cmd_tensor, 'dual': cmd_dual, 'hom': cmd_hom, 'milnor': cmd_milnor,
    'residue': cmd_residue, 'chern': cmd_chern, 'euler': cmd_euler, 'cardy': cmd_cardy,
    'pushforward': cmd_pushforward, 'fuse': cmd_fuse, 'knorrer': cmd_knorrer, 'selftest': cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--order', choices=ORDERS, help='Monomial order (overrides the document)')
    common.add_argument('--char', type=int, help='Coefficient characteristic (overrides the document)')
    common.add_argument('--degree-bound', type=int, help='Degree bound for homotopy searches')
    common.add_argument('--weights', type=str, help='Comma-separated weights of the integrated variables')
    common.add_argument('--json', action='store_true', help='Print the report as JSON')
    common.add_argument('--out', type=str, help='Write the resulting document to this file')
    common.add_argument('--cache', action='store_true', help='Reuse reports from the result cache')

    parser = _Parser(prog='mfpush', description='Matrix factorisations, pushforwards and residues')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)

    def add(name, help_text, *refs):
        p = sub.add_parser(name, parents=[common], help=help_text)
        for ref in refs:
            p.add_argument(ref, help='Document path, optionally FILE:NAME')
        return p

    add('check', 'Validate d^2 = W', 'document')
    add('tensor', 'Tensor product of two factorisations', 'left', 'right')
    add('dual', 'Dual factorisation', 'document')
    add('hom', 'Hom factorisation', 'left', 'right')
    add('milnor', 'Milnor number and Jacobi algebra basis', 'document')
    p = add('residue', 'Residue symbol Res[s dr / t]', 'document')
    p.add_argument('--y', help='Integrated variables (default: all)')
    p.add_argument('--t', help='Comma-separated t (default: dW/dy)')
    p.add_argument('--s', required=True, help='Numerator polynomial')
    p.add_argument('--r', help='Comma-separated r (default: t)')
    p.add_argument('--cross-check', action='store_true', help='Also evaluate the transformation law')
    add('chern', 'Chern character in J_W', 'document')
    add('euler', 'Euler characteristic of Hom by the residue formula', 'left', 'right')
    p = add('cardy', 'Cardy condition for endomorphisms', 'left', 'right')
    p.add_argument('--alpha', help='Name of an endomorphism of the left factorisation')
    p.add_argument('--beta', help='Name of an endomorphism of the right factorisation')
    p = add('pushforward', 'Finite model of a pushforward', 'document')
    p.add_argument('--y', help='Integrated variables')
    p.add_argument('--t', help='Comma-separated t (default: dW/dy)')
    p = add('fuse', 'Convolution of kernels F * E', 'left', 'right')
    p.add_argument('--y', help='Middle variables')
    p.add_argument('--v', help='Middle potential')
    p = add('knorrer', 'Knorrer periodicity round trip', 'document')
    p.add_argument('--u', default='u')
    p.add_argument('--v', default='v')
    add('selftest', 'Run the invariant suites')
    return parser


def _render(report: Report, as_json: bool) -> str:
    if as_json:
        return json.dumps(report.data, indent=2, sort_keys=True, ensure_ascii=False) + '\n'
    return '\n'.join(report.lines) + '\n'


def _cache_inputs(args) -> str:
    """Canonical text of every input document"""
    texts = []
    for attr in ('document', 'left', 'right'):
        ref = getattr(args, attr, None)
        if ref:
            path, name = _split_ref(ref)
            texts.append(f"{name or ''}\n{print_document(load_document(path, args.order, args.char))}")
    return '\n'.join(texts)


def run(argv: Sequence[str]) -> Tuple[int, str]:
    """Execute one command; returns (exit code, stdout text)"""
    args = build_parser().parse_args(list(argv))
    if not args.command:
        raise UsageError("A command is required")
    cache = ResultCache() if args.cache else None
    key = None
    if cache is not None and cache.enabled:
        flags = {k: v for k, v in sorted(vars(args).items()) if k not in ('cache', 'out')}
        key = cache_key(args.command, _cache_inputs(args), flags)
        hit = cache.get(key)
        if hit is not None:
            logger.info(f"Serving {args.command} from the result cache")
            return hit['code'], hit['output']
    elif cache is not None:
        logger.warning("--cache given but no DATABASE_URL is configured")

    report = COMMANDS[args.command](args)
    output = _render(report, args.json)
    if args.out:
        if report.document is None:
            raise UsageError(f"{args.command} produces no document for --out")
        with open(args.out, 'w', encoding='utf-8') as handle:
            handle.write(dumps_json(report.document) + '\n' if args.out.endswith('.json')
                         else print_document(report.document))
    if key is not None:
        cache.create_tables()
        cache.save(key, {'code': report.code, 'output': output})
    return report.code, output


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings.configure_logging()
    argv = sys.argv[1:] if argv is None else argv
    try:
        code, output = run(argv)
    except UsageError as e:
        print(f"❌ Usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        where = f" in {e.source}" if isinstance(e.source, str) and len(e.source) < 256 else ""
        logger.error(f"Parse error{where}: {e}")
        print(f"❌ Parse error{where}: {e}", file=sys.stderr)
        return e.exit_code
    except MFError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    sys.stdout.write(output)
    return code


if __name__ == "__main__":
    exit(main())
