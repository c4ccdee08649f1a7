"""High-precision reference values frozen into the Rust test-suite.

Run with `python3 python/reference_values.py`; requires mpmath only.
Every quantity is computed independently of the Rust implementation.
The Green's function uses the momentum integral rotated onto the imaginary
axis, where it is exponentially damped; mpmath's oscillatory quadrature of
the original cosine integral is printed alongside as a cross-check but is
only good to about 1e-11 here.
"""
import mpmath as mp

mp.mp.dps = 40


def greens(r, alpha, k, kappa):
    """(1/pi) int_0^inf cos(p r) / (K p^alpha + kappa^2) dp."""
    r = abs(mp.mpf(r))
    scale = k ** (-1 / alpha) * kappa ** (2 / alpha - 2)
    if r == 0:
        return scale / (alpha * mp.sin(mp.pi / alpha))
    z = r * (kappa ** 2 / k) ** (1 / alpha)
    w = mp.expj(mp.pi * alpha / 2)
    # q = i t: Re[i int_0^inf e^{-z t} / (1 + e^{i pi alpha/2} t^alpha) dt]
    f = lambda t: mp.re(1j * mp.exp(-z * t) / (1 + w * t ** alpha))
    tc = (-mp.cos(mp.pi * alpha / 2)) ** (1 / alpha) if mp.cos(mp.pi * alpha / 2) < 0 else 1
    pts = [0, tc / 4, tc, 2 * tc, 5 / z + tc, 20 / z + 3 * tc, mp.inf]
    return scale / mp.pi * mp.quad(f, sorted(set(pts)))


def greens_quadosc(r, alpha, k, kappa):
    f = lambda p: mp.cos(p * r) / (k * p ** alpha + kappa ** 2)
    return mp.quadosc(f, [0, mp.inf], omega=r) / mp.pi


def main():
    s2 = mp.sqrt(2)
    a12 = mp.mpf("1.2") + mp.sqrt(3) * mp.mpf("1e-3")
    a19 = mp.mpf("1.9") + mp.sqrt(5) * mp.mpf("1e-4")
    print("greens r=1 a=sqrt2 K=1 kappa=0.5:", mp.nstr(greens(1, s2, 1, mp.mpf("0.5")), 20))
    for a, name in [(s2, "sqrt2"), (a12, "a12"), (a19, "a19")]:
        for z in ["0", "0.3", "1", "3", "6", "12", "30"]:
            g = greens(mp.mpf(z), a, 1, 1)
            check = mp.nstr(g - greens_quadosc(mp.mpf(z), a, 1, 1), 3) if z != "0" else "-"
            print(f"scaled {name} z={z}:", mp.nstr(g, 22), "quadosc diff", check)
    # resonance margin over m <= 40
    for a, name in [(s2, "sqrt2"), (a12, "a12"), (a19, "a19")]:
        marg = min(min(abs(mp.sin((2 * m + 1) * mp.pi / a)) for m in range(0, 41)),
                   min(abs(mp.cos(m * a * mp.pi / 2)) for m in range(1, 41)))
        print(f"margin {name}:", mp.nstr(marg, 12))
    # Gaussian pair integral int int e^{-x^2}|x-y|^{a-1}e^{-y^2}
    for a in [s2, mp.mpf(2)]:
        # split the inner integral at the kink y = x
        inner = lambda x: mp.quad(lambda y: mp.exp(-y * y) * abs(x - y) ** (a - 1), [-12, x, 12])
        num = mp.quad(lambda x: mp.exp(-x * x) * inner(x), [-12, 0, 12])
        closed = mp.sqrt(2 * mp.pi) * 2 ** (a / 2 - 1) * mp.gamma(a / 2)
        print("pair a=", mp.nstr(a, 6), mp.nstr(num, 15), mp.nstr(closed, 20))
    # moment condition for Gaussian(1,1)
    for a in [s2, mp.mpf(2)]:
        m = 2 * mp.quad(lambda x: (1 + x) ** (2 * (a - 1)) * mp.exp(-x * x), [0, mp.inf])
        print("moment a=", mp.nstr(a, 6), mp.nstr(m, 20))
    # Rayleigh quotient of a Gaussian trial state, alpha=sqrt2, g=0.1, Gaussian(1,1), K=1
    for s in [5, 10, 20]:
        # psi = exp(-x^2/(2 s^2)); |psi_hat|^2 propto exp(-p^2 s^2)
        kin = mp.quad(lambda p: p ** s2 * mp.exp(-p * p * s * s), [0, mp.inf]) / \
            mp.quad(lambda p: mp.exp(-p * p * s * s), [0, mp.inf])
        pot = mp.quad(lambda x: mp.exp(-x * x) * mp.exp(-x * x / s ** 2), [-mp.inf, mp.inf]) / \
            mp.quad(lambda x: mp.exp(-x * x / s ** 2), [-mp.inf, mp.inf])
        print(f"rayleigh s={s}:", mp.nstr(kin - mp.mpf("0.1") * pot, 15))
    # d/dkappa G at r=1, alpha=sqrt2, K=1, kappa=1 (central difference in high precision)
    h = mp.mpf("1e-12")
    d = (greens(1, s2, 1, 1 + h) - greens(1, s2, 1, 1 - h)) / (2 * h)
    print("dG/dkappa r=1 a=sqrt2 kappa=1:", mp.nstr(d, 15))


if __name__ == "__main__":
    main()
