"""JSON input and output: problems, states, certificates.

Problem files carry either a complex Hermitian coefficient operator (upper
triangle is enough; the mirror image is filled in and cross-checked) or an
explicit real homogeneous polynomial.  Certificates store the full identity
data: bound, monomial basis, gram lower triangle, first order multipliers.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import InputError, SephierError
from .relaxation import SosCertificate
from .tensor_poly import ComplexHermitianOperator, SparsePolynomial

ENTRY_MIRROR_TOL = 1e-12


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _require(cond, message):
    if not cond:
        raise InputError(message)


def _operator_from_entries(doc) -> ComplexHermitianOperator:
    n = doc.get("n")
    d = doc.get("d")
    _require(isinstance(n, int) and n >= 1, "field 'n' must be a positive integer")
    _require(isinstance(d, int) and d >= 1, "field 'd' must be a positive integer")
    entries = doc.get("entries")
    _require(isinstance(entries, list), "field 'entries' must be a list")
    side = n ** d
    H = np.zeros((side, side), dtype=complex)
    seen = {}
    for item in entries:
        _require(
            isinstance(item, list) and len(item) == 4,
            f"entry {item!r} is not [row, col, re, im]",
        )
        r, c, re, im = item
        _require(isinstance(r, int) and isinstance(c, int), f"entry indices must be integers: {item!r}")
        _require(0 <= r < side and 0 <= c < side, f"entry index out of range for side {side}: {item!r}")
        _require(
            isinstance(re, (int, float)) and isinstance(im, (int, float)),
            f"entry values must be numbers: {item!r}",
        )
        val = complex(re, im)
        if (r, c) in seen:
            raise InputError(f"duplicate entry at ({r}, {c})")
        seen[(r, c)] = val
        if (c, r) in seen and abs(seen[(c, r)] - val.conjugate()) > ENTRY_MIRROR_TOL:
            raise InputError(f"entries at ({r}, {c}) and ({c}, {r}) are not conjugate")
        H[r, c] = val
        if r != c:
            H[c, r] = val.conjugate()
        elif abs(val.imag) > ENTRY_MIRROR_TOL:
            raise InputError(f"diagonal entry at ({r}, {r}) has imaginary part {val.imag}")
    try:
        return ComplexHermitianOperator(n, d, H)
    except SephierError as exc:
        raise InputError(str(exc)) from exc


def _polynomial_from_terms(doc) -> SparsePolynomial:
    m = doc.get("vars")
    degree = doc.get("degree")
    _require(isinstance(m, int) and m >= 1, "field 'vars' must be a positive integer")
    _require(
        isinstance(degree, int) and degree >= 2 and degree % 2 == 0,
        "field 'degree' must be a positive even integer",
    )
    terms = doc.get("terms")
    _require(isinstance(terms, list) and terms, "field 'terms' must be a nonempty list")
    acc = {}
    for item in terms:
        _require(isinstance(item, dict), f"term {item!r} is not an object")
        expo = item.get("exponents")
        coeff = item.get("coeff")
        _require(
            isinstance(expo, list) and len(expo) == m,
            f"term exponents must list {m} entries: {item!r}",
        )
        _require(
            all(isinstance(e, int) and e >= 0 for e in expo),
            f"term exponents must be nonnegative integers: {item!r}",
        )
        _require(isinstance(coeff, (int, float)), f"term coefficient must be a number: {item!r}")
        _require(
            sum(expo) == degree,
            f"term {item!r} has degree {sum(expo)}, expected {degree}",
        )
        key = tuple(expo)
        acc[key] = acc.get(key, 0.0) + float(coeff)
    poly = SparsePolynomial(m, acc)
    _require(not poly.is_zero(), "polynomial is identically zero")
    return poly


def load_problem(path):
    """-> ("complex_hermitian", operator) or ("real_polynomial", polynomial)."""
    doc = load_json(path)
    _require(isinstance(doc, dict), "problem file must hold a JSON object")
    kind = doc.get("type")
    if kind == "complex_hermitian":
        return kind, _operator_from_entries(doc)
    if kind == "real_polynomial":
        return kind, _polynomial_from_terms(doc)
    raise InputError(f"unknown problem type {kind!r}")


def load_state(path) -> ComplexHermitianOperator:
    """Bipartite density operator: type complex_hermitian, d = 2, unit trace, PSD."""
    doc = load_json(path)
    _require(isinstance(doc, dict), "state file must hold a JSON object")
    _require(doc.get("type") == "complex_hermitian", "state file must have type complex_hermitian")
    _require(doc.get("d") == 2, "a bipartite state needs d = 2")
    op = _operator_from_entries(doc)
    tr = float(np.real(np.trace(op.entries)))
    _require(abs(tr - 1.0) <= 1e-8, f"state trace is {tr}, expected 1")
    min_eig = float(np.linalg.eigvalsh(op.entries)[0])
    _require(min_eig >= -1e-8, f"state has negative eigenvalue {min_eig}")
    return op


def _sorted_terms(poly: SparsePolynomial):
    # graded lex descending, matching the monomial basis order
    keys = sorted(poly.terms, key=lambda e: (sum(e), e), reverse=True)
    return [{"exponents": list(e), "coeff": poly.terms[e]} for e in keys]


def save_certificate(path, cert: SosCertificate):
    G = np.asarray(cert.gram, dtype=float)
    N = G.shape[0]
    lower = [float(G[i, j]) for i in range(N) for j in range(i + 1)]
    chi = [
        {"i": int(i), "j": int(j), "terms": _sorted_terms(cert.chi[(i, j)])}
        for (i, j) in sorted(cert.chi)
    ]
    write_json(path, {
        "format": 1,
        "nu": float(cert.nu),
        "monomials": [list(mono) for mono in cert.monomials],
        "Q_lower_triangle": lower,
        "chi": chi,
    })


def load_certificate(path, half_degree: int | None = None) -> SosCertificate:
    doc = load_json(path)
    _require(isinstance(doc, dict), "certificate file must hold a JSON object")
    for key in ("nu", "monomials", "Q_lower_triangle", "chi"):
        _require(key in doc, f"certificate is missing field {key!r}")
    _require(isinstance(doc["nu"], (int, float)), "field 'nu' must be a number")
    monos = doc["monomials"]
    _require(isinstance(monos, list) and monos, "field 'monomials' must be a nonempty list")
    m = len(monos[0]) if isinstance(monos[0], list) else 0
    _require(m >= 1, "monomials must be nonempty exponent lists")
    monomials = []
    for mono in monos:
        _require(
            isinstance(mono, list) and len(mono) == m
            and all(isinstance(e, int) and e >= 0 for e in mono),
            f"bad monomial {mono!r}",
        )
        monomials.append(tuple(mono))
    K = sum(monomials[0])
    _require(
        all(sum(mono) == K for mono in monomials),
        "monomials must share one total degree",
    )
    N = len(monomials)
    lower = doc["Q_lower_triangle"]
    _require(
        isinstance(lower, list) and len(lower) == N * (N + 1) // 2
        and all(isinstance(v, (int, float)) for v in lower),
        f"Q_lower_triangle must list {N * (N + 1) // 2} numbers",
    )
    G = np.zeros((N, N))
    pos = 0
    for i in range(N):
        for j in range(i + 1):
            G[i, j] = lower[pos]
            G[j, i] = lower[pos]
            pos += 1
    chi = {}
    chi_degree = None
    _require(isinstance(doc["chi"], list), "field 'chi' must be a list")
    for item in doc["chi"]:
        _require(isinstance(item, dict), f"chi entry {item!r} is not an object")
        i, j = item.get("i"), item.get("j")
        _require(
            isinstance(i, int) and isinstance(j, int) and 0 <= i < j < m,
            f"chi entry needs indices 0 <= i < j < {m}: {item!r}",
        )
        _require((i, j) not in chi, f"duplicate chi entry for ({i}, {j})")
        terms = item.get("terms")
        _require(isinstance(terms, list), f"chi terms must be a list: {item!r}")
        acc = {}
        for t in terms:
            _require(isinstance(t, dict), f"chi term {t!r} is not an object")
            expo = t.get("exponents")
            coeff = t.get("coeff")
            _require(
                isinstance(expo, list) and len(expo) == m
                and all(isinstance(e, int) and e >= 0 for e in expo),
                f"bad chi exponents {t!r}",
            )
            _require(isinstance(coeff, (int, float)), f"bad chi coefficient {t!r}")
            acc[tuple(expo)] = acc.get(tuple(expo), 0.0) + float(coeff)
            if coeff != 0:
                chi_degree = sum(expo) if chi_degree is None else chi_degree
        chi[(i, j)] = SparsePolynomial(m, acc)
    if half_degree is not None:
        _require(
            1 <= half_degree <= K,
            f"half degree {half_degree} does not fit basis degree {K}",
        )
        d, r = half_degree, K - half_degree
    elif chi_degree is not None:
        r = chi_degree // 2
        _require(r <= K, "chi degree exceeds the basis degree")
        d = K - r
    else:
        d, r = K, 0
    return SosCertificate(
        nu=float(doc["nu"]),
        gram=G,
        chi=chi,
        monomials=monomials,
        num_vars=m,
        half_degree=d,
        level=r,
    )
