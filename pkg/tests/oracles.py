"""Independent reference computations for the tests."""
import mpmath as mp
import numpy as np

mp.mp.dps = 40


def rk4(f, y0, t_end, dt):
    """Fixed-step RK4 returning the state at every step boundary."""
    n = int(round(t_end / dt))
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    return np.array(out)


def planar_field(m, g, dz, alpha=0.0):
    """(x, y, Lx, Ly) field with the CoP at ``alpha`` times the CoM offset."""
    def f(s):
        x, y, Lx, Ly = s
        return np.array([Ly / (m * dz), -Lx / (m * dz),
                         -m * g * (1 - alpha) * y, m * g * (1 - alpha) * x])
    return f


def expm_flow(m, g, dz, t, alpha=0.0):
    """High-precision 2x2 flow of (x, Ly) by matrix exponential."""
    A = mp.matrix([[0, mp.mpf(1) / (mp.mpf(m) * dz)], [mp.mpf(m) * g * (1 - mp.mpf(alpha)), 0]])
    E = mp.expm(A * mp.mpf(t))
    return np.array([[float(E[i, j]) for j in range(2)] for i in range(2)])


def gain(m, g, dz, T, lam):
    w = mp.sqrt(mp.mpf(g) / dz)
    return float((mp.cosh(w * T) - lam) / (w * mp.sinh(w * T)))
