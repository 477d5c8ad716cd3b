"""Weighted coverage set functions.

A weighted coverage function scores a subset S of a ground set by the total
weight of universe elements whose incidence set meets S: f(S) = sum of w(u)
over u with P_u intersecting S. The module evaluates f exactly, together
with two continuous extensions used by the optimizer:

* the product form F(x) = sum_u w(u) * (1 - prod_{i in P_u} (1 - x_i)),
  the expected value of f on a random set that includes each element i
  independently with probability x_i, and
* the capped-sum bound G(x) = sum_u w(u) * min(1, sum_{i in P_u} x_i),
  a concave upper bound on F that agrees with it on 0/1 vectors and is
  never more than a factor 1/(1 - 1/e) above it.

Instances are stored as CSR arrays over the universe, so every operation
runs in time proportional to the total incidence size.
"""

import numpy as np

from submax import _kernels
from submax.errors import InputError

COORD_TOL = 1e-12


class WeightedCoverageFunction:
    """Universe weights plus, per universe element, its covering set P_u.

    ``incidence`` is a sequence of index iterables; each is sorted on entry
    and must not contain duplicates (a duplicated index would double-count
    in the continuous extensions).
    """

    def __init__(self, n_ground, universe_weights, incidence):
        n_ground = int(n_ground)
        if n_ground < 0:
            raise InputError("n_ground must be nonnegative")
        weights = np.asarray(universe_weights, dtype=np.float64)
        if weights.ndim != 1:
            raise InputError("universe_weights must be one-dimensional")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InputError("universe weights must be finite and nonnegative")
        if len(incidence) != weights.shape[0]:
            raise InputError("incidence and universe_weights lengths differ")
        indptr = np.zeros(weights.shape[0] + 1, dtype=np.int64)
        flat = []
        for u, members in enumerate(incidence):
            idx = sorted(int(i) for i in members)
            for a, b in zip(idx, idx[1:]):
                if a == b:
                    raise InputError(f"universe element {u} lists index {a} twice")
            if idx and (idx[0] < 0 or idx[-1] >= n_ground):
                raise InputError(f"universe element {u} has an index outside [0, {n_ground})")
            flat.extend(idx)
            indptr[u + 1] = len(flat)
        self.n_ground = n_ground
        self.weights = weights
        self.indptr = indptr
        self.indices = np.asarray(flat, dtype=np.int64)
        self._transpose = None

    @property
    def n_universe(self):
        return self.weights.shape[0]

    def incidence_of(self, u):
        """Sorted covering set of universe element u."""
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def transpose(self):
        """CSR from ground element to the universe elements it covers."""
        if self._transpose is None:
            counts = np.zeros(self.n_ground + 1, dtype=np.int64)
            for i in self.indices:
                counts[i + 1] += 1
            tindptr = np.cumsum(counts)
            tindices = np.empty(self.indices.shape[0], dtype=np.int64)
            cursor = tindptr[:-1].copy()
            for u in range(self.n_universe):
                for p in range(self.indptr[u], self.indptr[u + 1]):
                    i = self.indices[p]
                    tindices[cursor[i]] = u
                    cursor[i] += 1
            self._transpose = (tindptr, tindices)
        return self._transpose

    def max_incidence_size(self):
        if self.n_universe == 0:
            return 0
        return int(np.max(self.indptr[1:] - self.indptr[:-1]))


def check_point(x, n):
    """Validate a coordinate vector: right length, finite, inside [0, 1].

    Values straying from [0, 1] by at most ``COORD_TOL`` are clamped (the
    projection emits coordinates at floating-point boundaries); anything
    further out is rejected.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n:
        raise InputError(f"expected a vector of length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("coordinates must be finite")
    if np.any(x < -COORD_TOL) or np.any(x > 1.0 + COORD_TOL):
        raise InputError("coordinates must lie in [0, 1]")
    return np.clip(x, 0.0, 1.0)


def member_mask(S, n):
    """0/1 mask over the ground set; rejects out-of-range indices."""
    mask = np.zeros(n, dtype=np.uint8)
    for e in S:
        e = int(e)
        if e < 0 or e >= n:
            raise InputError(f"index {e} outside ground set of size {n}")
        mask[e] = 1
    return mask


def eval_set(f, S):
    """Total weight covered by S."""
    mask = member_mask(S, f.n_ground)
    return float(_kernels.wcf_eval_set(f.indptr, f.indices, f.weights, mask))


def multilinear(f, x):
    """Product-form extension: expected f of an independent random set."""
    x = check_point(x, f.n_ground)
    return float(_kernels.wcf_multilinear(f.indptr, f.indices, f.weights, x))


def concave_upper(f, x):
    """Capped-sum concave upper bound on the product form."""
    x = check_point(x, f.n_ground)
    return float(_kernels.wcf_concave(f.indptr, f.indices, f.weights, x))


def subgrad_upper(f, x):
    """A supergradient of the capped-sum bound at x.

    Each unsaturated term (sum over P_u strictly below 1) contributes its
    weighted indicator; terms at or past the cap contribute zero, which is
    the minimum-norm choice at the kink.
    """
    x = check_point(x, f.n_ground)
    return _kernels.wcf_subgrad(f.indptr, f.indices, f.weights, x)


def multilinear_grad(f, x):
    """Exact gradient of the product-form extension at x."""
    x = check_point(x, f.n_ground)
    return _kernels.wcf_mlgrad(f.indptr, f.indices, f.weights, x)


def sandwich_pair(x):
    """(alpha, beta) for one coverage term: alpha = 1 - prod(1 - x_i),
    beta = min(1, sum x_i). Always (1 - 1/e) * beta <= alpha <= beta, with
    equality alpha = beta on 0/1 vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InputError("expected a vector")
    if not np.all(np.isfinite(x)) or np.any(x < -COORD_TOL) or np.any(x > 1 + COORD_TOL):
        raise InputError("coordinates must lie in [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    alpha = 1.0 - float(np.prod(1.0 - x))
    beta = min(1.0, float(np.sum(x)))
    return alpha, beta


def subgradient_norm_bound(f):
    """Worst-case Euclidean norm of subgrad_upper over [0, 1]^n:
    sqrt(max_u |P_u|) times the total universe weight."""
    return float(np.sqrt(max(f.max_incidence_size(), 1)) * np.sum(f.weights))


def load_wcf(path):
    """Read the text format: header ``wcf <n_ground> <n_universe>``, then one
    ``<weight> <idx...>`` line per universe element."""
    weights = []
    incidence = []
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError(f"{path}:1: empty file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "wcf":
        raise InputError(f"{path}:1: expected header 'wcf <n_ground> <n_universe>'")
    try:
        n_ground, n_universe = int(head[1]), int(head[2])
    except ValueError:
        raise InputError(f"{path}:1: non-integer header fields") from None
    body = [(no, ln) for no, ln in enumerate(lines[1:], start=2) if ln.strip()]
    if len(body) != n_universe:
        raise InputError(f"{path}: header promises {n_universe} universe lines, found {len(body)}")
    for no, ln in body:
        parts = ln.split()
        try:
            weights.append(float(parts[0]))
            incidence.append([int(tok) for tok in parts[1:]])
        except (ValueError, IndexError):
            raise InputError(f"{path}:{no}: expected '<weight> <idx...>'") from None
    try:
        return WeightedCoverageFunction(n_ground, weights, incidence)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_wcf(f, path):
    """Write the text format read by load_wcf."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"wcf {f.n_ground} {f.n_universe}\n")
        for u in range(f.n_universe):
            idx = " ".join(str(int(i)) for i in f.incidence_of(u))
            fh.write(f"{f.weights[u]!r} {idx}".rstrip() + "\n")


class CoverageObjective:
    """Coverage instance exposed through the stochastic-objective interface.

    The capped-sum bound of a coverage function is cheap to evaluate and
    differentiate exactly, so the "sampled" subgradient is deterministic: a
    zero-variance unbiased estimate.
    """

    def __init__(self, f):
        self.f = f

    @property
    def n(self):
        return self.f.n_ground

    def grad_bound(self):
        return subgradient_norm_bound(self.f)

    def sample_subgradient(self, x, rng):
        return subgrad_upper(self.f, x)

    def estimate_value(self, x, n_samples, rng):
        return concave_upper(self.f, x)

    def exact_value(self, x):
        return concave_upper(self.f, x)

    def estimate_set_value(self, S, n_samples, rng):
        return eval_set(self.f, S)
