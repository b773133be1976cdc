"""Independent high-precision oracle for frozen test constants (mpmath, 50 digits)."""
from mpmath import mp, mpf, log, diff, exp, nsum, inf

mp.dps = 50


def shape(lu, ll):
    return 1 / (log(2 - lu) / log(2)), -1 / (log(ll) / log(2))


def jc(u, v, lu, ll):
    k, r = shape(lu, ll)
    a = 1 - (1 - u) ** k
    b = 1 - (1 - v) ** k
    return 1 - (1 - (a ** -r + b ** -r - 1) ** (-1 / r)) ** (1 / k)


def sjc(u, v, lu, ll):
    return (jc(u, v, lu, ll) + jc(1 - u, 1 - v, ll, lu) + u + v - 1) / 2


def ks_p(n, d):
    return 2 * nsum(lambda k: (-1) ** (k - 1) * exp(-2 * k * k * n * d * d), [1, inf])


m = mpf
print("shape(0.158,0.014)", shape(m("0.158"), m("0.014")))
print("shape(0.5,0.5)", shape(m("0.5"), m("0.5")))
print("jc_cdf(.5,.5|.3,.2)", jc(m("0.5"), m("0.5"), m("0.3"), m("0.2")))
print("sjc_cdf(.25,.75|.3,.1)", sjc(m("0.25"), m("0.75"), m("0.3"), m("0.1")))
print("jc_pdf(.5,.5|.3,.2)", diff(lambda x, y: jc(x, y, m("0.3"), m("0.2")), (m("0.5"), m("0.5")), (1, 1)))
print("sjc_pdf(.9,.9|.6,.1)", diff(lambda x, y: sjc(x, y, m("0.6"), m("0.1")), (m("0.9"), m("0.9")), (1, 1)))
print("sjc_pdf(.1,.1|.6,.1)", diff(lambda x, y: sjc(x, y, m("0.6"), m("0.1")), (m("0.1"), m("0.1")), (1, 1)))
print("sjc_h(v=.5|u=.5;.3,.1)", diff(lambda x: sjc(x, m("0.5"), m("0.3"), m("0.1")), m("0.5")))
print("ks_p(100,0.136)", ks_p(100, m("0.136")))
for lu, ll in [("0.3", "0.1"), ("0.6", "0.4")]:
    q = m("0.001")
    print("finite-q tails", lu, ll, "upper", (1 - 2 * (1 - q) + sjc(1 - q, 1 - q, m(lu), m(ll))) / q,
          "lower", sjc(q, q, m(lu), m(ll)) / q)
for e in ["1e-2", "1e-3", "1e-4", "1e-5"]:
    print("lower seq lambda_l=0.5 (lu=.3)", e, sjc(m(e), m(e), m("0.3"), m("0.5")) / m(e))
print("lower at 1e-4 lambda_l=0.001", sjc(m("1e-4"), m("1e-4"), m("0.3"), m("0.001")) / m("1e-4"))
