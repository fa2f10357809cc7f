"""Truncated Laurent series in one variable z over the exact scalar ring.

Each series carries a differential weight (power of dz) and a parity flag
theta in {0,1} marking one factor of the odd half-differential symbol T,
subject to T^2 = z dz. Truncation is tracked, not assumed: coefficients at
exponents above `trunc` are unknown, and any operation that would need one
raises TruncationError.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import NotInvertible, Ring, Scalar


class TruncationError(Exception):
    pass


class WeightError(Exception):
    pass


class FormalSeries:
    """Sum of c_k * z^k * dz^w * T^t for k in [min_exp, trunc]."""

    __slots__ = ("ring", "coeffs", "min_exp", "trunc", "dz_weight", "theta")

    def __init__(self, ring, coeffs, trunc, dz_weight=0, theta=0,
                 min_exp=None):
        assert theta in (0, 1)
        self.ring = ring
        self.coeffs = {k: c for k, c in coeffs.items() if c}
        self.trunc = trunc
        self.dz_weight = dz_weight
        self.theta = theta
        if min_exp is None:
            min_exp = min(self.coeffs) if self.coeffs else trunc + 1
        self.min_exp = min(min_exp,
                           min(self.coeffs) if self.coeffs else min_exp)
        assert all(self.min_exp <= k <= trunc for k in self.coeffs), \
            (self.min_exp, trunc, sorted(self.coeffs))

    # --- constructors --------------------------------------------------

    @classmethod
    def zero(cls, ring, trunc, dz_weight=0, theta=0):
        return cls(ring, {}, trunc, dz_weight, theta)

    @classmethod
    def monomial(cls, ring, coeff, exp, trunc, dz_weight=0, theta=0):
        if isinstance(coeff, (int, Fraction)):
            coeff = ring.rational(coeff)
        return cls(ring, {exp: coeff}, trunc, dz_weight, theta)

    def is_zero(self):
        return not self.coeffs

    def coeff(self, exp):
        """Coefficient at z^exp; TruncationError if unknown."""
        if exp > self.trunc:
            raise TruncationError(
                f"coefficient at exponent {exp} beyond truncation "
                f"{self.trunc}")
        return self.coeffs.get(exp, self.ring.zero())

    # --- ring operations -----------------------------------------------

    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        if (self.dz_weight, self.theta) != (other.dz_weight, other.theta):
            raise WeightError("adding series of different weight/parity")
        trunc = min(self.trunc, other.trunc)
        coeffs = {}
        for k, c in self.coeffs.items():
            if k <= trunc:
                coeffs[k] = c
        for k, c in other.coeffs.items():
            if k <= trunc:
                new = coeffs.get(k, self.ring.zero()) + c
                if new:
                    coeffs[k] = new
                else:
                    coeffs.pop(k, None)
        return FormalSeries(self.ring, coeffs, trunc, self.dz_weight,
                            self.theta,
                            min_exp=min(self.min_exp, other.min_exp))

    def __neg__(self):
        return FormalSeries(self.ring, {k: -c for k, c in self.coeffs.items()},
                            self.trunc, self.dz_weight, self.theta,
                            self.min_exp)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            scalar = self.ring.rational(scalar)
        if not scalar:
            return FormalSeries.zero(self.ring, self.trunc, self.dz_weight,
                                     self.theta)
        return FormalSeries(
            self.ring, {k: scalar * c for k, c in self.coeffs.items()},
            self.trunc, self.dz_weight, self.theta, self.min_exp)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        if not isinstance(other, FormalSeries):
            return NotImplemented
        trunc = min(self.trunc + other.min_exp, other.trunc + self.min_exp)
        min_exp = self.min_exp + other.min_exp
        coeffs = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                if k <= trunc:
                    new = coeffs.get(k, self.ring.zero()) + c1 * c2
                    if new:
                        coeffs[k] = new
                    else:
                        coeffs.pop(k, None)
        if self.theta and other.theta:
            # T*T = z dz: shift every exponent up by one
            coeffs = {k + 1: c for k, c in coeffs.items()}
            return FormalSeries(self.ring, coeffs, trunc + 1,
                                self.dz_weight + other.dz_weight + 1, 0,
                                min_exp + 1)
        return FormalSeries(self.ring, coeffs, trunc,
                            self.dz_weight + other.dz_weight,
                            self.theta + other.theta, min_exp)

    __rmul__ = __mul__

    def sigma(self):
        """Substitute z -> -z (each z and each dz flips sign; T invariant)."""
        flip = (-1) ** (self.dz_weight % 2)
        coeffs = {k: c * (flip * (-1) ** (k % 2))
                  for k, c in self.coeffs.items()}
        return FormalSeries(self.ring, coeffs, self.trunc, self.dz_weight,
                            self.theta, self.min_exp)

    def derive(self):
        """d/dz on the function part; picks up one dz."""
        coeffs = {}
        for k, c in self.coeffs.items():
            if k != 0:
                coeffs[k - 1] = c * k
        return FormalSeries(self.ring, coeffs, self.trunc - 1,
                            self.dz_weight + 1, self.theta, self.min_exp - 1)

    def integrate(self):
        """Antiderivative with zero constant term; removes one dz."""
        if self.dz_weight < 1:
            raise WeightError("integrating a series without a dz factor")
        coeffs = {}
        for k, c in self.coeffs.items():
            if k == -1:
                if c:
                    raise WeightError("nonzero residue has no antiderivative")
                continue
            coeffs[k + 1] = c * Fraction(1, k + 1)
        return FormalSeries(self.ring, coeffs, self.trunc + 1,
                            self.dz_weight - 1, self.theta, self.min_exp + 1)

    def invert(self):
        """Multiplicative inverse up to truncation; weight negated."""
        if self.theta:
            raise NotInvertible("cannot invert an odd-parity series")
        if not self.coeffs:
            raise NotInvertible("zero series")
        lead = min(self.coeffs)
        lead_coeff = self.coeffs[lead]
        inv_lead = lead_coeff.invert()  # may raise NotInvertible
        trunc = self.trunc - 2 * lead
        # a = c z^lead (1 + u); 1/a = z^(-lead)/c * sum (-u)^j
        rel_order = self.trunc - lead  # u known modulo z^(rel_order+1)
        u = {k - lead: inv_lead * c for k, c in self.coeffs.items()
             if k != lead}
        # accumulate geometric series in the 'relative' variable
        acc = {0: self.ring.one()}
        power = {0: self.ring.one()}
        for _ in range(rel_order if u else 0):
            new_power = {}
            for k1, c1 in power.items():
                for k2, c2 in u.items():
                    k = k1 + k2
                    if k <= rel_order:
                        new = new_power.get(k, self.ring.zero()) - c1 * c2
                        if new:
                            new_power[k] = new
                        else:
                            new_power.pop(k, None)
            power = new_power
            if not power:
                break
            for k, c in power.items():
                new = acc.get(k, self.ring.zero()) + c
                if new:
                    acc[k] = new
                else:
                    acc.pop(k, None)
        coeffs = {k - lead: inv_lead * c for k, c in acc.items()
                  if k - lead <= trunc}
        return FormalSeries(self.ring, coeffs, trunc, -self.dz_weight, 0,
                            -lead)

    def residue(self):
        """Coefficient of z^-1 dz; requires a plain one-form."""
        if self.dz_weight != 1 or self.theta != 0:
            raise WeightError(
                f"residue needs dz-weight 1, parity 0; got "
                f"{self.dz_weight}, {self.theta}")
        if -1 > self.trunc:
            raise TruncationError("residue coefficient not resolved")
        if -1 < self.min_exp:
            return self.ring.zero()
        return self.coeffs.get(-1, self.ring.zero())

    # --- misc ------------------------------------------------------------

    def __eq__(self, other):
        """Equality of known coefficients, weights and parities.

        Both series must resolve the compared range: equality is over
        [min(min_exp), min(trunc)] and requires identical weight/parity.
        """
        if not isinstance(other, FormalSeries):
            return NotImplemented
        if (self.dz_weight, self.theta) != (other.dz_weight, other.theta):
            return False
        trunc = min(self.trunc, other.trunc)
        keys = {k for k in self.coeffs if k <= trunc}
        keys |= {k for k in other.coeffs if k <= trunc}
        return all(self.coeffs.get(k, self.ring.zero())
                   == other.coeffs.get(k, self.ring.zero()) for k in keys)

    def __repr__(self):
        parts = []
        for k in sorted(self.coeffs):
            parts.append(f"({self.coeffs[k]})*z^{k}")
        body = " + ".join(parts) if parts else "0"
        tags = []
        if self.dz_weight:
            tags.append(f"dz^{self.dz_weight}")
        if self.theta:
            tags.append("T")
        return f"<{body} {' '.join(tags)} +O(z^{self.trunc + 1})>"


class BiForm:
    """Bivariate bilinear differential: fixed singular part + regular part.

    kind 'bosonic_02': singular part dz1 dz2/(z1-z2)^2; regular part
    sum_{k,l>=1} reg[k,l] z1^(k-1) z2^(l-1) dz1 dz2 with reg symmetric.

    kind 'fermionic_002': singular part
    -1/2 (z1+z2)/(z1-z2) T1 T2/(z1 z2); regular part
    sum_{k,l>=1} reg[k,l] z1^(k-1) z2^(l-1) T1 T2/(z1 z2) with reg
    antisymmetric (the function multiplying the ordered product T1 T2).
    """

    def __init__(self, ring, kind, regular, trunc):
        assert kind in ("bosonic_02", "fermionic_002")
        self.ring = ring
        self.kind = kind
        self.regular = {key: val for key, val in regular.items() if val}
        self.trunc = trunc
        for (k, l), val in self.regular.items():
            assert k >= 1 and l >= 1
            mirror = self.regular.get((l, k), ring.zero())
            if kind == "bosonic_02":
                assert mirror == val, f"regular part not symmetric at {k},{l}"
            else:
                assert mirror == -val, \
                    f"regular part not antisymmetric at {k},{l}"

    def eval_diag(self, mode):
        """Closed-form diagonal z2 = -z1 as a series in z = z1.

        mode 'plain' (bosonic_02): the value at (z, -z); the singular part
        contributes -dz^2/(4 z^2) since dz d(-z)/(z-(-z))^2 = -dz^2/(4z^2).

        mode 'derived_first' (fermionic_002): d/dz1 of the function part,
        times dz1, then z2 = -z1 (T1 T2 -> T^2 = z dz). The singular part's
        derivative has a removable numerator zero on the diagonal and
        evaluates to +dz^2/(4 z^2).

        mode 'derived_second' (fermionic_002): derivative on the first slot
        of the swapped form, evaluated back on the diagonal; singular part
        again +dz^2/(4 z^2) but the regular contribution differs.
        """
        ring = self.ring
        quarter = ring.rational(Fraction(1, 4))
        if self.kind == "bosonic_02":
            assert mode == "plain"
            coeffs = {-2: -quarter}
            for (k, l), val in self.regular.items():
                exp = k + l - 2
                if exp > self.trunc:
                    continue
                sign = (-1) ** (l % 2)
                new = coeffs.get(exp, ring.zero()) + val * sign
                if new:
                    coeffs[exp] = new
                else:
                    coeffs.pop(exp, None)
            return FormalSeries(ring, coeffs, self.trunc, 2, 0, -2)
        assert mode in ("derived_first", "derived_second")
        # function part h(z1,z2) multiplying T1 T2:
        #   h = h_sing + sum reg[k,l] z1^(k-2) z2^(l-2)
        # derived_first: z * d1 h(z, -z) * dz^2
        # derived_second: -z * d1 h(-z, z) * dz^2
        coeffs = {-2: quarter}
        for (k, l), val in self.regular.items():
            exp = k + l - 4  # (k-3) + (l-2) ... plus the z prefactor
            if k == 2:
                continue  # d/dz1 of z1^0 vanishes
            if exp > self.trunc:
                continue
            if mode == "derived_first":
                # z * (k-2) z^(k-3) (-z)^(l-2) = (k-2)(-1)^l z^(k+l-4)
                sign = (k - 2) * ((-1) ** (l % 2))
            else:
                # -z * (k-2) (-z)^(k-3) z^(l-2) = (k-2)(-1)^k z^(k+l-4)
                sign = (k - 2) * ((-1) ** (k % 2))
            new = coeffs.get(exp, ring.zero()) + val * sign
            if new:
                coeffs[exp] = new
            else:
                coeffs.pop(exp, None)
        return FormalSeries(ring, coeffs, self.trunc, 2, 0, -2)
