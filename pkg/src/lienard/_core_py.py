"""Pure-Python twin of the compiled kernel (same algorithm, same signatures)."""

import math

OK, UNBOUNDED, NO_RETURN, UNDERFLOW = 0, 1, 2, 3

# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)
_HENON_SUBSTEPS = 8


def horner(c, x):
    n = len(c)
    if n == 0:
        return 0.0
    acc = c[n - 1]
    for i in range(n - 2, -1, -1):
        acc = acc * x + c[i]
    return acc


def _henon(Fc, gc, eps, x, y):
    # integrate dx/dy = (y - eps F(x)) / (-g(x)) from y to 0 with RK4
    dy = -y / _HENON_SUBSTEPS
    for _ in range(_HENON_SUBSTEPS):
        k1 = (y - eps * horner(Fc, x)) / -horner(gc, x)
        xm = x + 0.5 * dy * k1
        k2 = (y + 0.5 * dy - eps * horner(Fc, xm)) / -horner(gc, xm)
        xm = x + 0.5 * dy * k2
        k3 = (y + 0.5 * dy - eps * horner(Fc, xm)) / -horner(gc, xm)
        xe = x + dy * k3
        k4 = (y + dy - eps * horner(Fc, xe)) / -horner(gc, xe)
        x += dy * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        y += dy
    return x


def return_map(Fc, gc, eps, a, x_threshold, box, rtol, atol, max_steps):
    """First return of (a, 0) to {y = 0, x > x_threshold} crossing downward.

    Returns (x_return, accepted_steps, status).
    """
    x, y = a, 0.0
    fx = y - eps * horner(Fc, x)
    fy = -horner(gc, x)
    h = 1e-3
    steps = 0
    tiny = 1e-14 * max(1.0, abs(a))
    while steps < max_steps:
        x2, y2 = x + h * _A21 * fx, y + h * _A21 * fy
        k2x, k2y = y2 - eps * horner(Fc, x2), -horner(gc, x2)
        x3 = x + h * (_A31 * fx + _A32 * k2x)
        y3 = y + h * (_A31 * fy + _A32 * k2y)
        k3x, k3y = y3 - eps * horner(Fc, x3), -horner(gc, x3)
        x4 = x + h * (_A41 * fx + _A42 * k2x + _A43 * k3x)
        y4 = y + h * (_A41 * fy + _A42 * k2y + _A43 * k3y)
        k4x, k4y = y4 - eps * horner(Fc, x4), -horner(gc, x4)
        x5 = x + h * (_A51 * fx + _A52 * k2x + _A53 * k3x + _A54 * k4x)
        y5 = y + h * (_A51 * fy + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        k5x, k5y = y5 - eps * horner(Fc, x5), -horner(gc, x5)
        x6 = x + h * (_A61 * fx + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
        y6 = y + h * (_A61 * fy + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
        k6x, k6y = y6 - eps * horner(Fc, x6), -horner(gc, x6)
        xn = x + h * (_B1 * fx + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + h * (_B1 * fy + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = yn - eps * horner(Fc, xn), -horner(gc, xn)
        ex = h * (_E1 * fx + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ey = h * (_E1 * fy + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))
        if not math.isfinite(err):
            h *= 0.1
            if abs(h) < tiny:
                return x, steps, UNDERFLOW
            continue
        if err <= 1.0:
            steps += 1
            if abs(xn) > box or abs(yn) > box:
                return xn, steps, UNBOUNDED
            if y > 0.0 and yn <= 0.0 and xn > x_threshold:
                return _henon(Fc, gc, eps, x, y), steps, OK
            x, y, fx, fy = xn, yn, k7x, k7y
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
        if abs(h) < tiny:
            return x, steps, UNDERFLOW
    return x, steps, NO_RETURN
