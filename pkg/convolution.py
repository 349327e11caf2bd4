#!/usr/bin/env python3
"""
Kernels between potentials and their convolution
Integral functors on objects, Chern characters of fused kernels and Knorrer periodicity
"""

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from chern import JacobiElement, boundary_bulk, hom_homotopies, jacobi_algebra, jacobi_frame
from connection import TAdicFrame, descend
from errors import (ContextMismatch, NotAFactorisation, NotZeroDimensional, ShapeMismatch, VariableClash,
                    VerificationFailed)
from matrices import PolyMatrix
from mfcore import (MatrixFactorisation, MFMap, dual, extend_map, extend_scalars, hom, hom_map, identity,
                    is_morphism, koszul_mf, partial_homotopy, supertrace, tensor, tensor_basis, tensor_maps)
from polyring import Polynomial, RingContext, to_polynomial
from pushforward import FieldCohomology, FiniteModel, _mat_mul, idempotent, matrix_rank
from residue import ResidueQuery, residue_trace

logger = logging.getLogger(__name__)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


class Kernel:
    """A factorisation of W_out - W_in over k[in, out]"""

    def __init__(self, mf: MatrixFactorisation, in_vars: Sequence[str], out_vars: Sequence[str],
                 w_in=0, w_out=0):
        self.mf = mf
        self.in_vars = tuple(in_vars)
        self.out_vars = tuple(out_vars)
        clash = set(self.in_vars) & set(self.out_vars)
        if clash:
            raise VariableClash(f"Variables {sorted(clash)} are both input and output")
        ctx = mf.ctx
        for name in self.in_vars + self.out_vars:
            if name not in ctx.index:
                raise ContextMismatch(f"Kernel variable {name!r} is not in {ctx!r}")
        self.w_in = to_polynomial(w_in, ctx)
        self.w_out = to_polynomial(w_out, ctx)
        if mf.potential != self.w_out - self.w_in:
            raise NotAFactorisation(f"Kernel potential {mf.potential} is not {self.w_out - self.w_in}")

    @property
    def ctx(self) -> RingContext:
        return self.mf.ctx

    def __repr__(self):
        return f"Kernel({list(self.in_vars)} -> {list(self.out_vars)}, ranks={self.mf.ranks})"


def object_kernel(X: MatrixFactorisation) -> Kernel:
    """X as a kernel from the point"""
    return Kernel(X, (), X.ctx.variables, 0, X.potential)


def _combined_context(F: Kernel, E: Kernel) -> RingContext:
    x, y, z = E.in_vars, E.out_vars, F.out_vars
    if set(F.in_vars) != set(y):
        raise ContextMismatch(f"Middle variables differ: {list(F.in_vars)} vs {list(y)}")
    for a, b in ((x, y), (x, z), (y, z)):
        clash = set(a) & set(b)
        if clash:
            raise VariableClash(f"Variables {sorted(clash)} are shared between kernels")
    ctx = RingContext(x + y + z, E.ctx.characteristic, E.ctx.order)
    if F.w_in.embed(ctx) != E.w_out.embed(ctx):
        raise ContextMismatch(f"Middle potentials differ: {F.w_in} vs {E.w_out}")
    return ctx


def external_tensor(F: Kernel, E: Kernel) -> MatrixFactorisation:
    """F (x) E over k[x, y, z], a factorisation of U - W"""
    ctx = _combined_context(F, E)
    result = tensor(extend_scalars(F.mf, ctx), extend_scalars(E.mf, ctx))
    logger.debug(f"External tensor of ranks {F.mf.ranks} and {E.mf.ranks} over {ctx.variables}")
    return result


def middle_frame(F: Kernel, E: Kernel, ctx: RingContext) -> TAdicFrame:
    V = E.w_out.embed(ctx)
    return TAdicFrame(ctx, E.out_vars, [V.derivative(y) for y in E.out_vars])


def convolve(F: Kernel, E: Kernel, alternative: bool = False) -> FiniteModel:
    """Finite model of F * E over k[x, z] with t = dV/dy

    The homotopies are 1 (x) d_y(d_E), or -d_y(d_F) (x) 1 when alternative is set.
    """
    ctx = _combined_context(F, E)
    F_ext, E_ext = extend_scalars(F.mf, ctx), extend_scalars(E.mf, ctx)
    T = tensor(F_ext, E_ext)
    frame = middle_frame(F, E, ctx)
    lambdas = []
    for y in E.out_vars:
        if alternative:
            lam = -tensor_maps(partial_homotopy(F_ext, y), identity(E_ext), source=T, target=T)
        else:
            lam = tensor_maps(identity(F_ext), partial_homotopy(E_ext, y), source=T, target=T)
        lambdas.append(lam)
    model = idempotent(T, frame, lambdas)
    logger.info(f"Convolution over {list(E.out_vars)}: model ranks {model.reduced.ranks}, mu = {frame.mu}")
    return model


def convolution_kernel(model: FiniteModel, F: Kernel, E: Kernel) -> Kernel:
    """The reduced factorisation of a convolution model as a kernel from E's inputs to F's outputs"""
    base = model.base_ctx
    return Kernel(model.reduced, E.in_vars, F.out_vars, E.w_in.embed(base), F.w_out.embed(base))


def apply_kernel(F: Kernel, X: MatrixFactorisation, alternative: bool = False) -> FiniteModel:
    """Phi_F(X) as the convolution of F with X viewed as a kernel from the point"""
    return convolve(F, object_kernel(X), alternative)


def chern_convolution(F: Kernel, E: Kernel) -> JacobiElement:
    """(-1)^(m choose 2) Res_y[ch(F) ch(E) dy / dV/dy] in J_W (x) J_U"""
    ctx = _combined_context(F, E)
    frame = middle_frame(F, E, ctx)
    m = frame.n
    base = frame.base_ctx
    algebra = jacobi_algebra((F.w_out.embed(ctx) - E.w_in.embed(ctx)).embed(base))

    def raw_chern(K: Kernel) -> Polynomial:
        X = K.mf
        n = X.ctx.nvars
        if n % 2:
            return ctx.zero()
        product = PolyMatrix.identity(X.ctx, X.rank)
        for v in X.ctx.variables:
            product = product @ X.differential.derivative(v)
        return supertrace(product, X.rank0).scale(_sign(comb(n, 2))).embed(ctx)

    g = raw_chern(F) * raw_chern(E)
    value = residue_trace(ResidueQuery(frame, g, tuple(ctx.var(y) for y in E.out_vars)))
    return JacobiElement.of(algebra, value.scale(_sign(comb(m, 2))))


# -- invariants of summands cut out by idempotents --

def summand_chern(model: FiniteModel, projectors: Sequence[MFMap] = (), shift: Optional[int] = None
                  ) -> JacobiElement:
    """ch of the summand of X/tX cut out by e and the extra projectors, unshifted"""
    M = model.reduced
    algebra = jacobi_algebra(M.potential)
    shift = model.n if shift is None else shift
    P = model.e
    for q in projectors:
        P = P @ q
    if M.ctx.nvars % 2:
        return JacobiElement(algebra, algebra.ctx.zero())
    value = boundary_bulk(M, P, algebra)
    return -value if shift % 2 else value


def summand_hom_dims(test_object: MatrixFactorisation, model: FiniteModel, projectors: Sequence[MFMap] = (),
                     shift: Optional[int] = None) -> Tuple[int, int]:
    """dim H^0, H^1 of Hom(test_object, Z) for the summand Z of X/tX cut out by e and the projectors"""
    M = model.reduced
    if test_object.ctx != M.ctx or test_object.potential != M.potential:
        raise ContextMismatch("Test object and model live over different rings or potentials")
    shift = model.n if shift is None else shift
    H = hom(test_object, M)
    hom_model = idempotent(H, jacobi_frame(M.potential), hom_homotopies(test_object, M, H))
    cohomology = FieldCohomology(hom_model.reduced)
    E = cohomology.induced(hom_model.e.matrix)
    one = identity(test_object)
    actions = [cohomology.induced(descend(hom_model.frame, hom_map(one, q).matrix))
               for q in [model.e] + list(projectors)]
    p = M.ctx.characteristic
    dims = []
    for degree in range(2):
        A = E[degree]
        for action in actions:
            A = _mat_mul(A, action[degree], p)
        A = _mat_mul(A, E[degree], p)
        dims.append(matrix_rank(A, p))
    if (hom_model.n + shift) % 2:
        dims.reverse()
    return dims[0], dims[1]


@dataclass
class CompositionReport:
    chern: Optional[Tuple[JacobiElement, JacobiElement]] = None
    hom_dims: List[Tuple[Tuple[int, int], Tuple[int, int]]] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        chern_ok = self.chern is None or self.chern[0] == self.chern[1]
        return chern_ok and all(a == b for a, b in self.hom_dims)


def composition_check(F: Kernel, E: Kernel, X: MatrixFactorisation, test_objects: Sequence[MatrixFactorisation] = ()
                      ) -> CompositionReport:
    """Compare Phi_F(Phi_E(X)) with Phi_{F * E}(X) through Chern characters and Hom dimensions"""
    # Phi_F(Phi_E(X))
    first = apply_kernel(E, X)
    intermediate = Kernel(first.reduced, (), E.out_vars, 0, E.w_out.embed(first.base_ctx))
    nested = convolve(F, intermediate)
    nested_projector = _descended_tensor(nested, F, intermediate, right=first.e)
    nested_shift = nested.n + first.n

    # Phi_{F * E}(X)
    fused = convolve(F, E)
    fused_kernel = convolution_kernel(fused, F, E)
    direct = apply_kernel(fused_kernel, X)
    direct_projector = _descended_tensor(direct, fused_kernel, object_kernel(X), left=fused.e)
    direct_shift = direct.n + fused.n

    report = CompositionReport()
    try:
        report.chern = (summand_chern(nested, [nested_projector], nested_shift),
                        summand_chern(direct, [direct_projector], direct_shift))
    except NotZeroDimensional:
        logger.warning("Output potential is not an isolated singularity; skipping Chern characters")
    for test_object in test_objects:
        report.hom_dims.append((summand_hom_dims(test_object, nested, [nested_projector], nested_shift),
                                summand_hom_dims(test_object, direct, [direct_projector], direct_shift)))
    logger.info(f"Composition check: {'agrees' if report.agrees else 'DISAGREES'}")
    return report


def _descended_tensor(outer: FiniteModel, F: Kernel, E: Kernel, left: Optional[MFMap] = None,
                      right: Optional[MFMap] = None) -> MFMap:
    """left (x) 1 or 1 (x) right on the source of a convolution model, descended to X/tX"""
    ctx = outer.source.ctx
    F_ext, E_ext = extend_scalars(F.mf, ctx), extend_scalars(E.mf, ctx)
    T = outer.source
    if left is not None:
        lifted = tensor_maps(extend_map(left, F_ext, F_ext), identity(E_ext), source=T, target=T)
    else:
        lifted = tensor_maps(identity(F_ext), extend_map(right, E_ext, E_ext), source=T, target=T)
    matrix = descend(outer.frame, lifted.matrix)
    projector = MFMap(outer.reduced, outer.reduced, 0, matrix, validate=False)
    if not is_morphism(projector):
        raise VerificationFailed("Lifted idempotent is not a morphism of the convolution model")
    return projector


# -- Knorrer periodicity --

def _fresh(ctx: RingContext, u: str, v: str) -> RingContext:
    for name in (u, v):
        if name in ctx.index:
            raise VariableClash(f"Variable {name!r} is already in {ctx!r}")
    return ctx.extend([u, v])


def knorrer_koszul(ctx: RingContext, u: str, v: str) -> MatrixFactorisation:
    """K = (u | v), a factorisation of uv"""
    return koszul_mf([(ctx.var(u), ctx.var(v))], ctx)


def knorrer_phi(X: MatrixFactorisation, u: str = 'u', v: str = 'v') -> MatrixFactorisation:
    """Phi(X) = X (x) K over k[x, u, v], a factorisation of W + uv"""
    ctx = _fresh(X.ctx, u, v)
    return tensor(extend_scalars(X, ctx), knorrer_koszul(ctx, u, v))


def knorrer_psi_model(Y: MatrixFactorisation, u: str = 'u', v: str = 'v') -> FiniteModel:
    """Finite model of the pushforward of Y (x) dual(K) along t = (u, v)"""
    ctx = Y.ctx
    K_dual = dual(knorrer_koszul(ctx, u, v))
    T = tensor(Y, K_dual)
    frame = TAdicFrame(ctx, (u, v), [ctx.var(u), ctx.var(v)])
    one = identity(Y)
    lambdas = [-tensor_maps(one, MFMap(K_dual, K_dual, 1, K_dual.differential.derivative(name), validate=False),
                            source=T, target=T)
               for name in (v, u)]
    return idempotent(T, frame, lambdas)


def knorrer_projector_entries() -> Dict[Tuple[Tuple[int, int], Tuple[int, int]], int]:
    """Nonzero entries of the idempotent on K (x) dual(K) at u = v = 0, keyed by (k_b k'_c) labels"""
    return {((0, 0), (0, 0)): 1, ((0, 0), (1, 1)): -1}


def _knorrer_labels(X: MatrixFactorisation, model: FiniteModel) -> List[Tuple[int, int, int]]:
    """(a, b, c) for each basis vector x_a (x) k_b (x) k'_c of the reduced model"""
    ctx = model.source.ctx
    u, v = model.frame.yvars
    K = knorrer_koszul(ctx, u, v)
    X_ext = extend_scalars(X, ctx)
    # model.source is Phi(X) (x) dual(K); its first factor indexes the (a, b) pairs
    phi = tensor(X_ext, K)
    XK_basis = tensor_basis(X_ext, K)
    if model.source.rank != phi.rank * 2:
        raise ShapeMismatch(f"Model of rank {model.source.rank} is not Phi(X) (x) dual(K) for X of rank {X.rank}")
    labels = []
    for (yi, c) in tensor_basis(phi, dual(K)):
        a, b = XK_basis[yi]
        labels.append((a, b, c))
    return labels


def knorrer_expected_idempotent(X: MatrixFactorisation, model: FiniteModel) -> PolyMatrix:
    labels = _knorrer_labels(X, model)
    entries = knorrer_projector_entries()
    base = model.base_ctx
    return PolyMatrix.from_function(
        base, len(labels), len(labels),
        lambda i, j: base.constant(entries.get(((labels[i][1], labels[i][2]), (labels[j][1], labels[j][2])), 0)
                                   if labels[i][0] == labels[j][0] else 0))


def knorrer_splitting_maps(X: MatrixFactorisation, model: FiniteModel) -> Tuple[MFMap, MFMap]:
    """f = 1 (x) (1, 0, 0, -1) onto X and g = 1 (x) (1, 0, 0, 0)^T back"""
    labels = _knorrer_labels(X, model)
    base = model.base_ctx
    X_base = extend_scalars(X, base) if X.ctx != base else X
    f_rows = [[0] * len(labels) for _ in range(X.rank)]
    g_rows = [[0] * X.rank for _ in labels]
    for k, (a, b, c) in enumerate(labels):
        if (b, c) == (0, 0):
            f_rows[a][k] = 1
            g_rows[k][a] = 1
        elif (b, c) == (1, 1):
            f_rows[a][k] = -1
    f = MFMap(model.reduced, X_base, 0, PolyMatrix(base, f_rows, (X.rank, len(labels))))
    g = MFMap(X_base, model.reduced, 0, PolyMatrix(base, g_rows, (len(labels), X.rank)))
    return f, g


@dataclass
class KnorrerReport:
    kappa: MFMap
    kappa_is_morphism: bool
    kappa_g_identity: bool
    kappa_e_equals_f: bool
    e_matches: bool

    @property
    def ok(self) -> bool:
        return self.kappa_is_morphism and self.kappa_g_identity and self.kappa_e_equals_f and self.e_matches


def knorrer_kappa(X: MatrixFactorisation, model: FiniteModel) -> MFMap:
    """kappa(x (x) a) = Res[str(a d_u(d_K) d_v(d_K)) du dv / u, v] x"""
    Y = model.source
    ctx = Y.ctx
    u, v = model.frame.yvars
    K = knorrer_koszul(ctx, u, v)
    curvature = K.differential.derivative(u) @ K.differential.derivative(v)
    values = {}
    for b in range(2):
        for c in range(2):
            unit = PolyMatrix.from_function(ctx, 2, 2, lambda i, j: ctx.constant(1 if (i, j) == (b, c) else 0))
            s = supertrace(unit @ curvature, K.rank0)
            values[(b, c)] = residue_trace(ResidueQuery(model.frame, s, (ctx.var(u), ctx.var(v))))
    labels = _knorrer_labels(X, model)
    base = model.base_ctx
    X_base = extend_scalars(X, base) if X.ctx != base else X
    rows = [[base.zero()] * len(labels) for _ in range(X.rank)]
    for k, (a, b, c) in enumerate(labels):
        rows[a][k] = values[(b, c)]
    return MFMap(model.reduced, X_base, 0, PolyMatrix(base, rows, (X.rank, len(labels))), validate=False)


def knorrer_kappa_check(X: MatrixFactorisation, u: str = 'u', v: str = 'v') -> KnorrerReport:
    model = knorrer_psi_model(knorrer_phi(X, u, v), u, v)
    kappa = knorrer_kappa(X, model)
    f, g = knorrer_splitting_maps(X, model)
    report = KnorrerReport(
        kappa=kappa,
        kappa_is_morphism=is_morphism(kappa),
        kappa_g_identity=(kappa @ g) == identity(g.source),
        kappa_e_equals_f=(kappa @ model.e) == f,
        e_matches=model.e.matrix == knorrer_expected_idempotent(X, model),
    )
    logger.info(f"Knorrer check for ranks {X.ranks}: {'ok' if report.ok else 'FAILED'}")
    return report
