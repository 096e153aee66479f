"""Standalone generator for the frozen expected values used in the test suite.

Run `python tests/oracles/compute_expected.py` to reprint every constant.
Everything here is evaluated with mpmath at 50 significant digits and written
down independently of the library: this script must never import tfqss.
"""

from mpmath import mp, mpf, exp, log, sqrt, pi, floor

mp.dps = 50

LOG2 = log(2)


def transmittance(length_km, alpha, eta_d):
    return eta_d * mpf(10) ** (-alpha * length_km / 10)


def ports(mu_eta_a, mu_eta_b, cos_theta):
    d1 = (sqrt(mu_eta_a) / 2 + sqrt(mu_eta_b) * cos_theta / 2) ** 2
    d2 = (sqrt(mu_eta_a) / 2 - sqrt(mu_eta_b) * cos_theta / 2) ** 2
    return d1, d2


def click(d, p_d):
    return 1 - (1 - p_d) * exp(-d)


def gain_qber(q1, q2, e_d):
    q_mu = q1 * (1 - q2) + q2 * (1 - q1) + q1 * q2
    e_mu = (e_d * q1 * (1 - q2) + (1 - e_d) * q2 * (1 - q1) + q1 * q2 / 2) / q_mu
    return q_mu, e_mu


def h2(x):
    x = mpf(x)
    if x == 0 or x == 1:
        return mpf(0)
    return (-x * log(x) - (1 - x) * log(1 - x)) / LOG2


def gamma_upper(n, k, lam, eps):
    n, k, lam, eps = mpf(n), mpf(k), mpf(lam), mpf(eps)
    lam = max(lam, 1 / (2 * k))
    tot = n + k
    big = max(n, k)
    g = tot / (n * k) * log(tot / (2 * pi * n * k * lam * (1 - lam) * eps**2))
    assert g > 0, "bound inapplicable"
    ag = big * g / tot
    return ((1 - 2 * lam) * ag + sqrt(ag**2 + 4 * lam * (1 - lam) * g)) / (
        2 + 2 * big * ag / tot
    )


def serfling_gamma(n, k, eps):
    n, k, eps = mpf(n), mpf(k), mpf(eps)
    return sqrt((n + k) * (k + 1) * log(1 / eps) / (2 * n * k**2))


def collision_probability(e_upper):
    e_upper = mpf(e_upper)
    return 1 - e_upper**2 - (1 - 6 * e_upper) ** 2 / 2


def analytic_point(l_a, l_b, mu_a, mu_b, alpha, eta_d, p_d, e_d):
    eta_a = transmittance(l_a, alpha, eta_d)
    eta_b = transmittance(l_b, alpha, eta_d)
    d1, d2 = ports(mu_a * eta_a, mu_b * eta_b, 1)
    q1, q2 = click(d1, p_d), click(d2, p_d)
    return gain_qber(q1, q2, e_d)


def key_rate(q_mu, e_mu, mu_max, n_pulses, k_test, eps_rs, eps_bar, eps_ec, eps_pa, f_e):
    n_mu = n_pulses * q_mu
    e_up = e_mu + gamma_upper(n_mu - k_test, k_test, e_mu, eps_rs)
    # The collision expression peaks at e = 3/19 and is meaningless past the
    # vertex; the library flags such points, so the oracle refuses them.
    assert e_up <= mpf(3) / 19
    p_co = collision_probability(e_up)
    pen_smooth = 7 / n_pulses * sqrt(n_mu * log(2 / eps_bar) / LOG2)
    pen_ec = log(2 / eps_ec) / LOG2 / n_pulses
    pen_pa = 2 * log(1 / eps_pa) / LOG2 / n_pulses
    rate = (
        q_mu * (-(1 - 2 * mu_max) * log(p_co) / LOG2 - f_e * h2(e_mu))
        - pen_smooth
        - pen_ec
        - pen_pa
    )
    return e_up, p_co, pen_smooth, pen_ec, pen_pa, rate


def show(name, value, digits=22):
    print(f"{name} = {mp.nstr(mpf(value), digits)}")


def main():
    print("# core model")
    show("transmittance(100, 0.165, 0.55)", transmittance(100, mpf("0.165"), mpf("0.55")))

    d1, d2 = ports(mpf("0.04"), mpf("0.01"), 1)
    show("ports(0.04, 0.01, theta=0).d1", d1)
    show("ports(0.04, 0.01, theta=0).d2", d2)

    q1 = click(mpf("0.0225"), mpf("1e-8"))
    q2 = click(mpf("0.0025"), mpf("1e-8"))
    show("click(0.0225, 1e-8)", q1)
    show("click(0.0025, 1e-8)", q2)

    q_mu, e_mu = gain_qber(q1, q2, mpf("0.02"))
    show("gain(q1, q2, e_d=0.02).q_mu", q_mu)
    show("gain(q1, q2, e_d=0.02).e_mu", e_mu)

    show("h2(0.11)", h2(mpf("0.11")))

    print()
    print("# reference point: alpha=0.165 eta_d=0.55 p_d=1e-8 e_d=0.02, l=50/50, mu=0.05/0.05")
    Q, E = analytic_point(50, 50, mpf("0.05"), mpf("0.05"), mpf("0.165"), mpf("0.55"), mpf("1e-8"), mpf("0.02"))
    show("point.q_mu", Q)
    show("point.e_mu", E)

    print()
    print("# sampling bound")
    g1 = gamma_upper(10**6, 10**5, mpf("0.02"), mpf("1e-10"))
    g2 = gamma_upper(10**4, 10**4, mpf("0.1"), mpf("1e-10"))
    s1 = serfling_gamma(10**6, 10**5, mpf("1e-10"))
    s2 = serfling_gamma(10**4, 10**4, mpf("1e-10"))
    show("gamma(1e6, 1e5, 0.02, 1e-10)", g1)
    show("gamma(1e4, 1e4, 0.10, 1e-10)", g2)
    show("serfling(1e6, 1e5, 1e-10)", s1)
    show("serfling(1e4, 1e4, 1e-10)", s2)
    assert g1 < s1 and g2 < s2, "Serfling envelope must dominate here"
    print("# (serfling dominates the tight bound at both points)")

    show("collision_probability(0.05)", collision_probability(mpf("0.05")))

    print()
    print("# finite-key regression: N=1e12, eps all 1e-10, f_e=1.15, k=round(n_mu/10)")
    n_pulses = mpf("1e12")
    n_mu = n_pulses * Q
    k = floor(n_mu / 10 + mpf("0.5"))
    print(f"k_test = {int(k)}")
    e_up, p_co, pen_s, pen_ec, pen_pa, rate = key_rate(
        Q, E, mpf("0.05"), n_pulses, k, mpf("1e-10"), mpf("1e-10"), mpf("1e-10"), mpf("1e-10"), mpf("1.15")
    )
    show("reg.e_mu_upper", e_up)
    show("reg.p_co", p_co)
    show("reg.pen_smooth", pen_s)
    show("reg.pen_ec", pen_ec)
    show("reg.pen_pa", pen_pa)
    show("reg.rate", rate)

    print()
    print("# asymptotic limit at the same point")
    p_co_inf = collision_probability(E)
    rate_inf = Q * (-(1 - 2 * mpf("0.05")) * log(p_co_inf) / LOG2 - mpf("1.15") * h2(E))
    show("asym.p_co", p_co_inf)
    show("asym.rate", rate_inf)


if __name__ == "__main__":
    main()
