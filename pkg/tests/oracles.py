"""Independent reference implementations used as second routes in tests.

Everything here is coded directly from closed-form expressions in
arbitrary precision and shares no code with the package.
"""
import mpmath as mp

mp.mp.dps = 40


def iconic_structural(Z, Z_bar):
    Z, Z_bar = mp.mpf(Z), mp.mpf(Z_bar)
    if Z <= Z_bar:
        return Z
    A = mp.mpf(3) / 5 * Z_bar ** (mp.mpf(-2) / 3)
    return A * Z ** (mp.mpf(5) / 3) + mp.mpf(2) / 5 * Z_bar


def iconic_entropy_fn(Z, Z_bar):
    Z, Z_bar = mp.mpf(Z), mp.mpf(Z_bar)
    return 1 + mp.log(Z_bar / Z) if Z <= Z_bar else Z_bar / Z


class IconicGas:
    """Pressure, specific energy and entropy of the iconic gas with radiation."""

    def __init__(self, Z_bar, a):
        self.Z_bar = mp.mpf(Z_bar)
        self.a = mp.mpf(a)

    def _Z(self, rho, theta):
        return mp.mpf(rho) / mp.mpf(theta) ** mp.mpf(1.5)

    def pressure(self, rho, theta):
        rho, theta = mp.mpf(rho), mp.mpf(theta)
        Z = self._Z(rho, theta)
        return theta ** mp.mpf(2.5) * iconic_structural(Z, self.Z_bar) + self.a / 3 * theta**4

    def energy(self, rho, theta):
        rho, theta = mp.mpf(rho), mp.mpf(theta)
        Z = self._Z(rho, theta)
        return (mp.mpf(1.5) * theta ** mp.mpf(2.5) * iconic_structural(Z, self.Z_bar) / rho
                + self.a * theta**4 / rho)

    def entropy(self, rho, theta):
        rho, theta = mp.mpf(rho), mp.mpf(theta)
        Z = self._Z(rho, theta)
        return iconic_entropy_fn(Z, self.Z_bar) + 4 * self.a / 3 * theta**3 / rho

    def d(self, fn, rho, theta, wrt):
        """High-precision derivative along one smooth branch."""
        rho, theta = mp.mpf(rho), mp.mpf(theta)
        if wrt == "rho":
            return mp.diff(lambda r: fn(r, theta), rho)
        return mp.diff(lambda t: fn(rho, t), theta)

    def gibbs_residual(self, rho, theta):
        s_r = self.d(self.entropy, rho, theta, "rho")
        e_r = self.d(self.energy, rho, theta, "rho")
        return s_r - (e_r - self.pressure(rho, theta) / mp.mpf(rho) ** 2) / mp.mpf(theta)
