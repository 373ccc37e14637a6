#!/usr/bin/env python3
"""Generate the frozen triangle cubature tables used by the core library.

Each rule is a fully symmetric node set on the reference triangle with
vertices (0,0), (1,0), (0,1).  The orbit structure per (family, p) is fixed
below; the free orbit parameters and weights are solved from the moment
equations with a double-precision multistart followed by a 60-digit
Gauss-Newton polish.  Results are written as plain-text tables under
data/cubature/ and mirrored verbatim into core/src/cubature_tables.inc so
the library needs no runtime data files.

Rerunning the script reproduces the shipped tables byte for byte (fixed
seeds, fixed strategy order).
"""

import pathlib

import mpmath as mp
import numpy as np
from scipy.optimize import least_squares

mp.mp.dps = 60

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA_DIR = ROOT / "data" / "cubature"
INC_PATH = ROOT / "core" / "src" / "cubature_tables.inc"
GAUSS_INC_PATH = ROOT / "core" / "src" / "gauss_face_tables.inc"


# ---------------------------------------------------------------------------
# orbits


def perms6(t):
    a, b, c = t
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def orbit_points(kind, geom):
    """Barycentric points of one symmetry orbit."""
    third = mp.mpf(1) / 3
    if kind == "c":
        return [(third, third, third)]
    if kind == "s21":
        a = geom[0]
        return [(a, a, 1 - 2 * a), (a, 1 - 2 * a, a), (1 - 2 * a, a, a)]
    if kind == "s111":
        a, b = geom
        return perms6((a, b, 1 - a - b))
    if kind == "edge":
        a = geom[0]
        return perms6((a, 1 - a, mp.mpf(0)))
    raise ValueError(kind)


def bary_to_xy(lam):
    return (lam[1], lam[2])


N_GEOM = {"c": 0, "s21": 1, "s111": 2, "edge": 1}


class Orbit:
    def __init__(self, kind, fixed_geom=None):
        self.kind = kind
        self.fixed = fixed_geom  # tuple -> geometry not an unknown

    @property
    def n_free_geom(self):
        return 0 if self.fixed is not None else N_GEOM[self.kind]

    def points(self, geom):
        g = self.fixed if self.fixed is not None else geom
        return orbit_points(self.kind, g)


# ---------------------------------------------------------------------------
# moment system


def tri_bary_moment(a, b, c):
    """Integral of l1^a l2^b l3^c over the reference triangle (area 1/2)."""
    return (
        mp.factorial(a)
        * mp.factorial(b)
        * mp.factorial(c)
        / mp.factorial(a + b + c + 2)
    )


def monomials_up_to(degree):
    return [(d - j, j) for d in range(degree + 1) for j in range(d + 1)]


def unpack(orbits, u):
    """Split the unknown vector into (geom list, weight list)."""
    geoms, weights, k = [], [], 0
    for ob in orbits:
        g = tuple(u[k : k + ob.n_free_geom])
        k += ob.n_free_geom
        geoms.append(g)
    for _ in orbits:
        weights.append(u[k])
        k += 1
    assert k == len(u)
    return geoms, weights


def residual_fixed(orbits, degree, extra_sym, u):
    # x^i y^j = l2^i l3^j so the exact value is tri_bary_moment(0, i, j)
    geoms, weights = unpack(orbits, u)
    pts = [[bary_to_xy(l) for l in ob.points(g)] for ob, g in zip(orbits, geoms)]
    res = []
    for (i, j) in monomials_up_to(degree):
        acc = mp.mpf(0)
        for w, ps in zip(weights, pts):
            acc += w * mp.fsum(x**i * y**j for (x, y) in ps)
        res.append(acc - tri_bary_moment(0, i, j))
    for trip in extra_sym:
        perms = sorted(set(perms6(trip)))
        acc = mp.mpf(0)
        for w, g, ob in zip(weights, geoms, orbits):
            for lam in ob.points(g):
                acc += w * mp.fsum(
                    lam[0] ** pa * lam[1] ** pb * lam[2] ** pc
                    for (pa, pb, pc) in perms
                )
        res.append(acc - len(perms) * tri_bary_moment(*trip))
    return res


def solve_rule(orbits, degree, extra_sym, seed, n_starts=400):
    """Multistart double solve, then Gauss-Newton polish at 60 digits."""
    rng = np.random.default_rng(seed)
    n_geom = sum(ob.n_free_geom for ob in orbits)
    n_w = len(orbits)

    def res_f64(u):
        return [float(v) for v in residual_fixed(orbits, degree,
                                                 extra_sym, [mp.mpf(x) for x in u])]

    best = None
    for _ in range(n_starts):
        geom0 = []
        for ob in orbits:
            if ob.n_free_geom == 1:
                geom0.append(rng.uniform(0.02, 0.48))
            elif ob.n_free_geom == 2:
                a = rng.uniform(0.02, 0.6)
                b = rng.uniform(0.02, 0.9 - a)
                geom0 += [a, b]
        u0 = np.array(geom0 + list(rng.uniform(0.01, 0.3, n_w)))
        try:
            sol = least_squares(res_f64, u0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except Exception:
            continue
        if sol.cost > 1e-24:
            continue
        u = [mp.mpf(x) for x in sol.x]
        u = polish(orbits, degree, extra_sym, u)
        if u is None:
            continue
        if valid_candidate(orbits, degree, extra_sym, u):
            best = u
            break
    return best


def polish(orbits, degree, extra_sym, u, iters=12):
    n = len(u)
    h = mp.mpf("1e-25")
    for _ in range(iters):
        r = mp.matrix(residual_fixed(orbits, degree, extra_sym, u))
        J = mp.matrix(r.rows, n)
        for k in range(n):
            up = list(u); up[k] += h
            um = list(u); um[k] -= h
            rp = residual_fixed(orbits, degree, extra_sym, up)
            rm = residual_fixed(orbits, degree, extra_sym, um)
            for i in range(r.rows):
                J[i, k] = (rp[i] - rm[i]) / (2 * h)
        JT = J.T
        A = JT * J
        g = JT * r
        try:
            du = mp.lu_solve(A, g)
        except Exception:
            return None
        u = [u[k] - du[k] for k in range(n)]
        if max(abs(v) for v in residual_fixed(orbits, degree, extra_sym, u)) < mp.mpf("1e-50"):
            return u
    rmax = max(abs(v) for v in residual_fixed(orbits, degree, extra_sym, u))
    return u if rmax < mp.mpf("1e-45") else None


def valid_candidate(orbits, degree, extra_sym, u):
    geoms, weights = unpack(orbits, u)
    if any(w <= mp.mpf("1e-6") for w in weights):
        return False
    for ob, g in zip(orbits, geoms):
        for lam in ob.points(g):
            if any(l < mp.mpf("-1e-30") for l in lam):
                return False
    return True


# ---------------------------------------------------------------------------
# validation


def rule_nodes(orbits, u):
    geoms, weights = unpack(orbits, u)
    nodes = []
    for ob, g, w in zip(orbits, geoms, weights):
        for lam in ob.points(g):
            x, y = bary_to_xy(lam)
            nodes.append((x, y, w))
    return nodes


def validate(name, family, p, degree, orbits, u):
    nodes = rule_nodes(orbits, u)
    n = len(nodes)
    # moment exactness at high precision
    worst = mp.mpf(0)
    for (i, j) in monomials_up_to(degree):
        acc = mp.fsum(w * x**i * y**j for (x, y, w) in nodes)
        worst = max(worst, abs(acc - tri_bary_moment(0, i, j)))
    assert worst < mp.mpf("1e-45"), (name, worst)
    # positivity / distinctness
    assert all(w > 0 for (_, _, w) in nodes), name
    for a in range(n):
        for b in range(a + 1, n):
            d = mp.sqrt((nodes[a][0] - nodes[b][0]) ** 2 + (nodes[a][1] - nodes[b][1]) ** 2)
            assert d > mp.mpf("1e-8"), (name, "coincident nodes")
    # interiority (omega) / face counts (gamma)
    if family == "omega":
        for (x, y, _) in nodes:
            lam = (1 - x - y, x, y)
            assert min(lam) > mp.mpf("1e-4"), (name, "node not strictly interior")
    else:
        for fa, fb in (((0, 0), (1, 0)), ((1, 0), (0, 1)), ((0, 1), (0, 0))):
            on_face = 0
            for (x, y, _) in nodes:
                cr = (fb[0] - fa[0]) * (y - fa[1]) - (fb[1] - fa[1]) * (x - fa[0])
                if abs(cr) < mp.mpf("1e-30"):
                    on_face += 1
            assert on_face == p + 1, (name, "face node count", on_face)
    # Vandermonde rank for degree-p polynomials
    nb = (p + 1) * (p + 2) // 2
    V = np.array(
        [[float(x) ** i * float(y) ** j for (i, j) in monomials_up_to(p)]
         for (x, y, _) in nodes]
    )
    sv = np.linalg.svd(V, compute_uv=False)
    assert sv[nb - 1] / sv[0] > 1e-8, (name, "rank-deficient Vandermonde", sv)
    print(f"  {name}: n={n} worst moment defect {mp.nstr(worst, 3)} "
          f"svd ratio {sv[nb-1]/sv[0]:.2e}")
    return nodes


# ---------------------------------------------------------------------------
# rule catalogue

V0 = mp.mpf(0)
HALF = mp.mpf(1) / 2

RULES = [
    # family, p, degree, orbits, extra symmetric bary moments, seed
    ("omega", 1, 2, [Orbit("s21")], [], 11),
    ("omega", 2, 4, [Orbit("s21"), Orbit("s21")], [], 12),
    ("omega", 3, 5, [Orbit("c"), Orbit("s21"), Orbit("s111")], [(2, 2, 2)], 13),
    ("omega", 4, 7, [Orbit("s21"), Orbit("s21"), Orbit("s21"), Orbit("s111")],
     [(4, 2, 2)], 14),
    ("gamma", 1, 1, [Orbit("s21", (V0,))], [], 21),
    ("gamma", 2, 3, [Orbit("s21", (V0,)), Orbit("s21", (HALF,)), Orbit("c")], [], 22),
    ("gamma", 3, 5, [Orbit("s21", (V0,)), Orbit("edge"), Orbit("s21")], [], 23),
    ("gamma", 4, 7, [Orbit("s21", (V0,)), Orbit("s21", (HALF,)), Orbit("edge"),
                     Orbit("s21"), Orbit("s21")], [], 24),
]


def fmt(v):
    s = mp.nstr(v, 17, strip_zeros=False)
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def table_text(family, p, degree, nodes):
    lines = [
        "# symmetric triangle cubature on reference vertices (0,0) (1,0) (0,1)",
        "# format v1: header keys, then one 'x y w' record per node",
        f"family {family}",
        f"p {p}",
        f"degree {degree}",
        f"nodes {len(nodes)}",
    ]
    for (x, y, w) in nodes:
        lines.append(f"{fmt(x)} {fmt(y)} {fmt(w)}")
    return "\n".join(lines) + "\n"


def gauss_rules_text():
    """Legendre-Gauss rules on [0,1] for n = 2..5 nodes."""
    out = ["// Legendre-Gauss nodes/weights on [0,1]; generated, do not edit."]
    for n in range(2, 6):
        xs = [mp.mpf(0)] * n
        ws = [mp.mpf(0)] * n
        x0, w0 = np.polynomial.legendre.leggauss(n)
        for i in range(n):
            x = mp.mpf(float(x0[i]))
            for _ in range(80):
                f = mp.legendre(n, x)
                df = mp.diff(lambda t: mp.legendre(n, t), x)
                x = x - f / df
            dP = mp.diff(lambda t: mp.legendre(n, t), x)
            xs[i] = (x + 1) / 2
            ws[i] = 1 / ((1 - x**2) * dP**2)
        out.append(f"static const double kGaussX{n}[] = {{"
                   + ", ".join(fmt(v) for v in xs) + "};")
        out.append(f"static const double kGaussW{n}[] = {{"
                   + ", ".join(fmt(v) for v in ws) + "};")
    return "\n".join(out) + "\n"


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    INC_PATH.parent.mkdir(parents=True, exist_ok=True)
    inc = ["// Frozen cubature tables; generated by scripts/generate_cubature_tables.py."]
    for family, p, degree, orbits, extra, seed in RULES:
        name = f"tri_{family}_p{p}"
        u = solve_rule(orbits, degree, extra, seed)
        assert u is not None, f"no valid rule found for {name}"
        nodes = validate(name, family, p, degree, orbits, u)
        text = table_text(family, p, degree, nodes)
        (DATA_DIR / f"{name}.txt").write_text(text)
        inc.append(f'static const char* k_table_{family}_p{p} = R"TBL({text})TBL";')
    INC_PATH.write_text("\n".join(inc) + "\n")
    GAUSS_INC_PATH.write_text(gauss_rules_text())
    print(f"wrote {len(RULES)} tables to {DATA_DIR}")
    print(f"wrote {INC_PATH}")
    print(f"wrote {GAUSS_INC_PATH}")


if __name__ == "__main__":
    main()
