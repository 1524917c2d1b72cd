"""
Finite-dimensional C*-algebras and Hilbert bimodules over them.

An FDAlgebra ⊕_i M_{n_i}(ℂ) stores its elements as block-diagonal N×N complex
matrices (N = Σ n_i) and uses matrix units as its linear basis.

A Bimodule is a finite-dimensional vector space ℂ^d with
  - left action matrices, one per matrix unit of the left algebra,
  - right action matrices (ξ·b = R_b ξ, so R_{bc} = R_c R_b),
  - a Gram tensor gram[i, j] = ⟨b_i, b_j⟩ (an N_B×N_B block matrix).
The trace of the Gram tensor is a positive definite scalar form (the
"metric"); compact maps are adjointed and normed against it. In finite
dimensions every adjointable map is compact, so CompactMap covers 𝒦 = 𝓛.
"""
import logging

import numpy as np

import config
from services.errors import ModuleError
from services.reports import Report

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Small numerical helpers
# ---------------------------------------------------------------------------
def _herm(m):
    return (m + m.conj().T) / 2


def _cut(eigenvalues, cut=None):
    cut = config.RANK_CUT if cut is None else cut
    scale = max(1.0, float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 1.0)
    return cut * scale


def rank(vectors, cut=None):
    """Numerical rank of a stack of row vectors."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.size == 0:
        return 0
    s = np.linalg.svd(vectors, compute_uv=False)
    return int(np.sum(s > _cut(s, cut)))


def spectral_norm(m):
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


# ---------------------------------------------------------------------------
# Algebras
# ---------------------------------------------------------------------------
class FDAlgebra:
    def __init__(self, blocks):
        self.blocks = tuple(int(b) for b in blocks)
        if not self.blocks or any(b < 1 for b in self.blocks):
            raise ModuleError(f"blocks must be positive integers, got {blocks!r}")
        self.size = sum(self.blocks)
        self.dim = sum(b * b for b in self.blocks)
        self.offsets = tuple(int(x) for x in np.cumsum((0,) + self.blocks[:-1]))
        # matrix units, indexed (row, col) into the N×N ambient matrix
        self._units = [(off + i, off + j) for off, b in zip(self.offsets, self.blocks)
                       for i in range(b) for j in range(b)]
        self._rows = np.array([r for r, _ in self._units])
        self._cols = np.array([c for _, c in self._units])

    def __eq__(self, other):
        return isinstance(other, FDAlgebra) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return "⊕".join(f"M{b}" if b > 1 else "C" for b in self.blocks)

    def basis(self):
        out = []
        for r, c in self._units:
            e = np.zeros((self.size, self.size), dtype=complex)
            e[r, c] = 1
            out.append(e)
        return out

    def unit(self):
        return np.eye(self.size, dtype=complex)

    def zero(self):
        return np.zeros((self.size, self.size), dtype=complex)

    def coords(self, a):
        """Coordinates of an element (or a stack of elements) in the matrix-unit basis."""
        a = np.asarray(a, dtype=complex)
        return a[..., self._rows, self._cols]

    def element(self, coords):
        a = self.zero()
        a[self._rows, self._cols] = np.asarray(coords, dtype=complex)
        return a

    def off_block(self, a):
        """Size of the part of ``a`` outside the diagonal blocks."""
        a = np.asarray(a, dtype=complex)
        return spectral_norm(a - self.element(self.coords(a)))

    def random(self, rng):
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.element(c)


def direct_sum_algebra(algebras):
    """⊕ algebras; returns the sum and, per summand, (basis offset, size offset)."""
    blocks = [b for alg in algebras for b in alg.blocks]
    big = FDAlgebra(blocks)
    slots, basis_off, size_off = [], 0, 0
    for alg in algebras:
        slots.append((basis_off, size_off))
        basis_off += alg.dim
        size_off += alg.size
    return big, slots


def positivity(a, module=None, tol=None):
    """(is_positive, min eigenvalue) for an algebra element or a self-map of ``module``."""
    tol = config.TOL if tol is None else tol
    if isinstance(a, CompactMap):
        module = a.domain
        a = module.half @ a.matrix @ module.half_inv
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return True, 0.0
    hermitian = spectral_norm(a - a.conj().T) <= tol * max(1.0, spectral_norm(a))
    low = float(np.min(np.linalg.eigvalsh(_herm(a))))
    return bool(hermitian and low >= -tol), low


# ---------------------------------------------------------------------------
# Bimodules
# ---------------------------------------------------------------------------
class Bimodule:
    def __init__(self, left, right, left_action, right_action, gram, name=""):
        self.left = left
        self.right = right
        self.name = name
        self.L = np.asarray(left_action, dtype=complex)
        self.R = np.asarray(right_action, dtype=complex)
        self.gram = np.asarray(gram, dtype=complex)
        self.dim = self.gram.shape[0]
        d = self.dim
        if self.L.shape != (left.dim, d, d):
            raise ModuleError(f"{name}: left action has shape {self.L.shape}, expected {(left.dim, d, d)}")
        if self.R.shape != (right.dim, d, d):
            raise ModuleError(f"{name}: right action has shape {self.R.shape}, expected {(right.dim, d, d)}")
        if self.gram.shape != (d, d, right.size, right.size):
            raise ModuleError(f"{name}: Gram tensor has shape {self.gram.shape}")
        self.metric = _herm(np.einsum("ijkk->ij", self.gram))
        # tensor provenance, filled in by tensor()
        self.factors = None
        self.proj = None
        self.lift = None
        self._half = None

    def __repr__(self):
        return f"Bimodule({self.name or '?'}: {self.left!r}-{self.right!r}, dim {self.dim})"

    # -- Scalar geometry --
    def _roots(self):
        if self._half is None:
            w, v = np.linalg.eigh(self.metric)
            if self.dim and np.min(w) <= _cut(w):
                raise ModuleError(f"{self.name}: inner product is not definite (min eigenvalue {np.min(w):.3e})")
            self._half = (v * np.sqrt(w)) @ v.conj().T
            self._half_inv = (v / np.sqrt(w)) @ v.conj().T
        return self._half, self._half_inv

    @property
    def half(self):
        return self._roots()[0]

    @property
    def half_inv(self):
        return self._roots()[1]

    # -- Actions --
    def left_matrix(self, a):
        return np.einsum("k,kij->ij", self.left.coords(a), self.L)

    def right_matrix(self, b):
        return np.einsum("k,kij->ij", self.right.coords(b), self.R)

    def act_left(self, a, xi):
        return self.left_matrix(a) @ xi

    def act_right(self, xi, b):
        return self.right_matrix(b) @ xi

    def inner(self, xi, eta):
        """⟨ξ, η⟩, conjugate-linear in ξ."""
        return np.einsum("i,j,ijkl->kl", np.conj(xi), eta, self.gram)

    def norm(self, xi):
        return float(np.sqrt(spectral_norm(self.inner(xi, xi))))

    def basis_vector(self, i):
        e = np.zeros(self.dim, dtype=complex)
        e[i] = 1
        return e

    def random_vector(self, rng):
        return rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)

    # -- Tensor provenance --
    def factor(self, xi, eta):
        """The class of ξ⊗η in this module (only for modules built by tensor())."""
        if self.proj is None:
            raise ModuleError(f"{self.name} is not a tensor product")
        return self.proj @ np.kron(xi, eta)


class CompactMap:
    """A right-linear map between modules over the same right algebra."""

    def __init__(self, domain, codomain, matrix):
        self.domain = domain
        self.codomain = codomain
        self.matrix = np.asarray(matrix, dtype=complex)
        if self.matrix.shape != (codomain.dim, domain.dim):
            raise ModuleError(f"matrix shape {self.matrix.shape} does not match {codomain.dim}x{domain.dim}")
        self._adjoint = None

    def __repr__(self):
        return f"CompactMap({self.domain.name} -> {self.codomain.name})"

    @classmethod
    def identity(cls, module):
        return cls(module, module, np.eye(module.dim, dtype=complex))

    @classmethod
    def zero(cls, domain, codomain):
        return cls(domain, codomain, np.zeros((codomain.dim, domain.dim), dtype=complex))

    @classmethod
    def left_multiplication(cls, module, a):
        return cls(module, module, module.left_matrix(a))

    def __call__(self, xi):
        return self.matrix @ xi

    def adjoint(self):
        """T* solved against the Gram forms: ⟨Tξ, η⟩ = ⟨ξ, T*η⟩."""
        if self._adjoint is None:
            m_dom = self.domain.metric
            m_cod = self.codomain.metric
            star = np.linalg.pinv(m_dom, rcond=config.RANK_CUT, hermitian=True) @ self.matrix.conj().T @ m_cod
            self._adjoint = CompactMap(self.codomain, self.domain, star)
            self._adjoint._adjoint = self
        return self._adjoint

    @property
    def H(self):
        return self.adjoint()

    def __matmul__(self, other):
        if other.codomain.dim != self.domain.dim:
            raise ModuleError(f"cannot compose {self} after {other}")
        return CompactMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def __add__(self, other):
        return CompactMap(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other):
        return CompactMap(self.domain, self.codomain, self.matrix - other.matrix)

    def __neg__(self):
        return CompactMap(self.domain, self.codomain, -self.matrix)

    def scale(self, z):
        return CompactMap(self.domain, self.codomain, z * self.matrix)

    def norm(self):
        """Operator norm in 𝓛(X, Y), computed in metric-orthonormal coordinates."""
        if self.matrix.size == 0:
            return 0.0
        return spectral_norm(self.codomain.half @ self.matrix @ self.domain.half_inv)

    def distance(self, other):
        return (self - other).norm()

    def right_linearity_residual(self):
        res = [spectral_norm(self.matrix @ rd - rc @ self.matrix)
               for rd, rc in zip(self.domain.R, self.codomain.R)]
        return max(res, default=0.0)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------
def identity_module(alg, name=""):
    """_id A: A as an A–A correspondence with ⟨x, y⟩ = x*y."""
    basis = alg.basis()
    left = np.array([[alg.coords(e @ f) for f in basis] for e in basis]).transpose(0, 2, 1)
    right = np.array([[alg.coords(f @ e) for f in basis] for e in basis]).transpose(0, 2, 1)
    gram = np.array([[e.conj().T @ f for f in basis] for e in basis])
    return Bimodule(alg, alg, left, right, gram, name=name or f"id({alg!r})")


def homomorphism_module(phi, source, target, name=""):
    """_φB: the algebra B = ``target`` with left action a·x = φ(a)x, right multiplication, ⟨x, y⟩ = x*y."""
    basis_a = source.basis()
    basis_b = target.basis()
    left = np.array([[target.coords(phi(a) @ f) for f in basis_b] for a in basis_a]).transpose(0, 2, 1)
    right = np.array([[target.coords(f @ e) for f in basis_b] for e in basis_b]).transpose(0, 2, 1)
    gram = np.array([[e.conj().T @ f for f in basis_b] for e in basis_b])
    return Bimodule(source, target, left, right, gram, name=name or "hom")


def matrix_module(left, right, name=""):
    """p×q matrices as an M_p–M_q correspondence, ⟨x, y⟩ = x*y."""
    if len(left.blocks) != 1 or len(right.blocks) != 1:
        raise ModuleError("matrix_module needs single-block algebras")
    p, q = left.size, right.size
    units = []
    for i in range(p):
        for j in range(q):
            e = np.zeros((p, q), dtype=complex)
            e[i, j] = 1
            units.append(e)

    def coords(m):
        return m.reshape(-1)

    L = np.array([[coords(a @ e) for e in units] for a in left.basis()]).transpose(0, 2, 1)
    R = np.array([[coords(e @ b) for e in units] for b in right.basis()]).transpose(0, 2, 1)
    G = np.array([[e.conj().T @ f for f in units] for e in units])
    return Bimodule(left, right, L, R, G, name=name or f"M{p}x{q}")


def direct_sum(modules, name=""):
    """⊕ modules over common left/right algebras; returns (sum, coordinate offsets)."""
    if not modules:
        raise ModuleError("direct sum of no modules")
    left, right = modules[0].left, modules[0].right
    for m in modules:
        if m.left != left or m.right != right:
            raise ModuleError(f"{m.name}: algebras differ in direct sum")
    d = sum(m.dim for m in modules)
    L = np.zeros((left.dim, d, d), dtype=complex)
    R = np.zeros((right.dim, d, d), dtype=complex)
    G = np.zeros((d, d, right.size, right.size), dtype=complex)
    offsets, off = [], 0
    for m in modules:
        sl = slice(off, off + m.dim)
        L[:, sl, sl] = m.L
        R[:, sl, sl] = m.R
        G[sl, sl] = m.gram
        offsets.append(off)
        off += m.dim
    return Bimodule(left, right, L, R, G, name=name or "⊕"), offsets


def extend_scalars(module, left, left_slot, right, right_slot, name=""):
    """View an A_v–A_w module as a module over the direct sums ``left``/``right``.

    Slots are (basis offset, size offset) pairs from direct_sum_algebra().
    Basis elements of other summands act by zero.
    """
    d = module.dim
    L = np.zeros((left.dim, d, d), dtype=complex)
    R = np.zeros((right.dim, d, d), dtype=complex)
    G = np.zeros((d, d, right.size, right.size), dtype=complex)
    lb, _ = left_slot
    rb, rs = right_slot
    L[lb:lb + module.left.dim] = module.L
    R[rb:rb + module.right.dim] = module.R
    n = module.right.size
    G[:, :, rs:rs + n, rs:rs + n] = module.gram
    return Bimodule(left, right, L, R, G, name=name or module.name)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------
def rank_one(xi, xi_module, eta, eta_module):
    """θ_{ξ,η}: ζ ↦ ξ·⟨η, ζ⟩ as a map eta_module → xi_module."""
    if xi_module.right != eta_module.right:
        raise ModuleError(f"rank-one operator needs a common right algebra, got "
                          f"{xi_module.right!r} and {eta_module.right!r}")
    # ⟨η, e_j⟩ for every basis vector e_j of eta_module
    inners = np.einsum("i,ijkl->jkl", np.conj(eta), eta_module.gram)
    cols = [xi_module.right_matrix(b) @ xi for b in inners]
    matrix = np.array(cols).T if cols else np.zeros((xi_module.dim, 0), dtype=complex)
    return CompactMap(eta_module, xi_module, matrix)


def frame(module):
    """A Parseval frame {u_i} with Σ θ_{u_i,u_i} = id.

    Built from the basis: F = Σ θ_{b_i,b_i} is positive and invertible on a
    definite module, and u_i = F^{-1/2} b_i.
    """
    half, half_inv = module.half, module.half_inv  # raises on indefinite modules
    F = sum((rank_one(e, module, e, module).matrix for e in np.eye(module.dim, dtype=complex)),
            np.zeros((module.dim, module.dim), dtype=complex))
    w, v = np.linalg.eigh(_herm(half @ F @ half_inv))
    if np.min(w) <= _cut(w):
        raise ModuleError(f"{module.name}: localisation operator is singular")
    root_inv = half_inv @ ((v / np.sqrt(w)) @ v.conj().T) @ half
    return [root_inv[:, i] for i in range(module.dim)]


def frame_sum(module, vectors):
    """Σ θ_{u,u} over ``vectors``."""
    total = np.zeros((module.dim, module.dim), dtype=complex)
    for u in vectors:
        total += rank_one(u, module, u, module).matrix
    return CompactMap(module, module, total)


def expand_compact(T, frame_vectors):
    """Rank-one expansion T = Σ θ_{T u_i, u_i} over a frame of T's domain."""
    return [(T(u), u) for u in frame_vectors]


def tensor(x, y, name=""):
    """x ⊗_B y as the Gram-kernel quotient of the algebraic tensor product.

    Returns (module, factor) where factor(ξ, η) is the class of ξ⊗η.
    """
    if x.right != y.left:
        raise ModuleError(f"cannot tensor {x.name} and {y.name}: middle algebras "
                          f"{x.right!r} and {y.left!r} differ")
    B = x.right
    # φ_y(⟨b_i, b_i'⟩_B) as matrices on y
    phi = np.einsum("abk,kpq->abpq", B.coords(x.gram), y.L)
    # ⟨b_i⊗f_j, b_i'⊗f_j'⟩ = ⟨f_j, φ_y(⟨b_i,b_i'⟩) f_j'⟩
    g = np.einsum("abmq,jmst->ajbqst", phi, y.gram)
    D = x.dim * y.dim
    g = g.reshape(D, D, y.right.size, y.right.size)
    scalar = _herm(np.einsum("abkk->ab", g))
    w, v = np.linalg.eigh(scalar)
    keep = w > _cut(w)
    lift = v[:, keep] / np.sqrt(w[keep])
    proj = lift.conj().T @ scalar
    gram = np.einsum("ar,bs,abkl->rskl", lift.conj(), lift, g)
    eye_x, eye_y = np.eye(x.dim), np.eye(y.dim)
    left = np.array([proj @ np.kron(m, eye_y) @ lift for m in x.L])
    right = np.array([proj @ np.kron(eye_x, m) @ lift for m in y.R])
    if not keep.any():
        left = np.zeros((x.left.dim, 0, 0), dtype=complex)
        right = np.zeros((y.right.dim, 0, 0), dtype=complex)
    out = Bimodule(x.left, y.right, left, right, gram, name=name or f"({x.name}⊗{y.name})")
    out.factors, out.proj, out.lift = (x, y), proj, lift
    log.debug("tensor %s: algebraic dim %d, quotient dim %d", out.name, D, out.dim)
    return out, out.factor


def tensor_maps(S, T, source, target):
    """S⊗T: source = S.domain⊗T.domain → target = S.codomain⊗T.codomain.

    T must be a bimodule map (left-linear over the middle algebra) for the
    result to be well defined on the quotients.
    """
    return CompactMap(source, target, target.proj @ np.kron(S.matrix, T.matrix) @ source.lift)


def induced_map(T, y, source=None, target=None):
    """(φ_y)_*(T) = T⊗1 on tensor(T.domain, y) → tensor(T.codomain, y)."""
    source = source if source is not None else tensor(T.domain, y)[0]
    target = target if target is not None else (source if T.codomain is T.domain else tensor(T.codomain, y)[0])
    return tensor_maps(T, CompactMap.identity(y), source, target)


def associator(x_yz, xy_z):
    """The canonical re-bracketing x⊗(y⊗z) → (x⊗y)⊗z between two constructed tensors."""
    x, yz = x_yz.factors
    xy, z = xy_z.factors
    matrix = (xy_z.proj @ np.kron(xy.proj, np.eye(z.dim))
              @ np.kron(np.eye(x.dim), yz.lift) @ x_yz.lift)
    return CompactMap(x_yz, xy_z, matrix)


def compact_basis(x, y):
    """A linear basis of 𝒦(x, y): the right-linear maps x → y."""
    eye_x, eye_y = np.eye(x.dim), np.eye(y.dim)
    # vec(T R) − vec(R' T), row-major vec
    rows = [np.kron(eye_y, rx.T) - np.kron(ry, eye_x) for rx, ry in zip(x.R, y.R)]
    system = np.vstack(rows) if rows else np.zeros((0, x.dim * y.dim))
    if system.size == 0:
        null = np.eye(x.dim * y.dim, dtype=complex)
    else:
        _, s, vh = np.linalg.svd(system)
        r = int(np.sum(s > _cut(s)))
        null = vh[r:].conj().T
    return [CompactMap(x, y, null[:, i].reshape(y.dim, x.dim)) for i in range(null.shape[1])]


def compact_dim(x, y):
    return len(compact_basis(x, y))


def polar_unitary(T):
    """The unitary part of T's polar decomposition, in the module geometry."""
    on = T.codomain.half @ T.matrix @ T.domain.half_inv
    u, _, vh = np.linalg.svd(on)
    return CompactMap(T.domain, T.codomain, T.codomain.half_inv @ (u @ vh) @ T.domain.half)


def unitarity_residual(U):
    """max(‖U*U − 1‖, ‖UU* − 1‖)."""
    star = U.adjoint()
    a = spectral_norm((star @ U).matrix - np.eye(U.domain.dim))
    b = spectral_norm((U @ star).matrix - np.eye(U.codomain.dim))
    return max(a, b)


def bimodule_map_residual(U):
    """How far U is from intertwining the left and right actions."""
    res = [spectral_norm(U.matrix @ ld - lc @ U.matrix) for ld, lc in zip(U.domain.L, U.codomain.L)]
    return max(max(res, default=0.0), U.right_linearity_residual())


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------
def verify_bimodule(x, tol=None):
    """Hilbert-module and correspondence axioms on a basis, plus the regularity flags."""
    tol = config.TOL if tol is None else tol
    report = Report(f"verify_bimodule {x.name}".strip())
    A, B = x.left, x.right
    ea, eb = A.basis(), B.basis()
    d = x.dim

    def unit_index(alg, r, c):
        return alg._units.index((r, c))

    # left action is a *-homomorphism on matrix units
    res = 0.0
    for p, (r1, c1) in enumerate(A._units):
        for q, (r2, c2) in enumerate(A._units):
            expect = x.L[unit_index(A, r1, c2)] if c1 == r2 else 0
            res = max(res, spectral_norm(x.L[p] @ x.L[q] - expect))
    report.residual("left.homomorphism", res, tol)

    # right action is an anti-homomorphism: R_{E1 E2} = R_{E2} R_{E1}
    res = 0.0
    for p, (r1, c1) in enumerate(B._units):
        for q, (r2, c2) in enumerate(B._units):
            expect = x.R[unit_index(B, r1, c2)] if c1 == r2 else 0
            res = max(res, spectral_norm(x.R[q] @ x.R[p] - expect))
    report.residual("right.antihomomorphism", res, tol)
    report.residual("right.unital", spectral_norm(x.right_matrix(B.unit()) - np.eye(d)) if d else 0.0, tol)

    res = max((spectral_norm(l @ r - r @ l) for l in x.L for r in x.R), default=0.0)
    report.residual("actions.commute", res, tol)

    # inner product axioms
    res = max((spectral_norm(x.gram[i, j].conj().T - x.gram[j, i]) for i in range(d) for j in range(d)), default=0.0)
    report.residual("inner.hermitian", res, tol)
    res = max((B.off_block(x.gram[i, j]) for i in range(d) for j in range(d)), default=0.0)
    report.residual("inner.in_algebra", res, tol)
    res = 0.0
    for k, e in enumerate(eb):
        for i in range(d):
            for j in range(d):
                lhs = x.inner(x.basis_vector(i), x.R[k] @ x.basis_vector(j))
                res = max(res, spectral_norm(lhs - x.gram[i, j] @ e))
    report.residual("inner.right_linear", res, tol)

    big = x.gram.transpose(0, 2, 1, 3).reshape(d * B.size, d * B.size)
    low = float(np.min(np.linalg.eigvalsh(_herm(big)))) if d else 0.0
    report.add("inner.positive", low >= -tol, residual=max(0.0, -low))
    w = np.linalg.eigvalsh(x.metric) if d else np.array([1.0])
    report.add("inner.definite", float(np.min(w)) > _cut(w), detail=f"min metric eigenvalue {np.min(w):.3e}")

    # left action adjointable: ⟨aξ, η⟩ = ⟨ξ, a*η⟩
    res = 0.0
    for a in ea:
        la, lstar = x.left_matrix(a), x.left_matrix(a.conj().T)
        for i in range(d):
            for j in range(d):
                lhs = x.inner(la @ x.basis_vector(i), x.basis_vector(j))
                rhs = x.inner(x.basis_vector(i), lstar @ x.basis_vector(j))
                res = max(res, spectral_norm(lhs - rhs))
    report.residual("left.adjointable", res, tol)

    # regularity flags
    span = rank([B.coords(x.gram[i, j]) for i in range(d) for j in range(d)]) if d else 0
    report.add("full", span == B.dim, detail=f"inner-product span {span}/{B.dim}")
    nondeg = rank(np.hstack(list(x.L)).T) if d else 0
    report.add("nondegenerate", nondeg == d, detail=f"A·X span {nondeg}/{d}")
    inj = rank([m.ravel() for m in x.L])
    report.add("left.injective", inj == A.dim, detail=f"left action rank {inj}/{A.dim}")
    return report
