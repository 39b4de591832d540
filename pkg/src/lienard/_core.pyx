# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled return-map kernel; mirrors _core_py line for line."""

from libc.math cimport fabs, sqrt, pow, isfinite

cdef enum:
    _OK = 0
    _UNBOUNDED = 1
    _NO_RETURN = 2
    _UNDERFLOW = 3

OK, UNBOUNDED, NO_RETURN, UNDERFLOW = _OK, _UNBOUNDED, _NO_RETURN, _UNDERFLOW

cdef double _A21 = 1.0 / 5
cdef double _A31 = 3.0 / 40, _A32 = 9.0 / 40
cdef double _A41 = 44.0 / 45, _A42 = -56.0 / 15, _A43 = 32.0 / 9
cdef double _A51 = 19372.0 / 6561, _A52 = -25360.0 / 2187, _A53 = 64448.0 / 6561, _A54 = -212.0 / 729
cdef double _A61 = 9017.0 / 3168, _A62 = -355.0 / 33, _A63 = 46732.0 / 5247, _A64 = 49.0 / 176
cdef double _A65 = -5103.0 / 18656
cdef double _B1 = 35.0 / 384, _B3 = 500.0 / 1113, _B4 = 125.0 / 192, _B5 = -2187.0 / 6784
cdef double _B6 = 11.0 / 84
cdef double _E1 = 71.0 / 57600, _E3 = -71.0 / 16695, _E4 = 71.0 / 1920, _E5 = -17253.0 / 339200
cdef double _E6 = 22.0 / 525, _E7 = -1.0 / 40
cdef int _HENON_SUBSTEPS = 8


cdef inline double _horner(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t n = c.shape[0], i
    cdef double acc
    if n == 0:
        return 0.0
    acc = c[n - 1]
    for i in range(n - 2, -1, -1):
        acc = acc * x + c[i]
    return acc


def horner(const double[::1] c, double x):
    return _horner(c, x)


cdef double _henon(const double[::1] Fc, const double[::1] gc, double eps, double x, double y) noexcept nogil:
    cdef double dy = -y / _HENON_SUBSTEPS
    cdef double k1, k2, k3, k4, xm, xe
    cdef int s
    for s in range(_HENON_SUBSTEPS):
        k1 = (y - eps * _horner(Fc, x)) / -_horner(gc, x)
        xm = x + 0.5 * dy * k1
        k2 = (y + 0.5 * dy - eps * _horner(Fc, xm)) / -_horner(gc, xm)
        xm = x + 0.5 * dy * k2
        k3 = (y + 0.5 * dy - eps * _horner(Fc, xm)) / -_horner(gc, xm)
        xe = x + dy * k3
        k4 = (y + dy - eps * _horner(Fc, xe)) / -_horner(gc, xe)
        x += dy * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        y += dy
    return x


def return_map(const double[::1] Fc, const double[::1] gc, double eps, double a,
               double x_threshold, double box, double rtol, double atol, long max_steps):
    """First return of (a, 0) to {y = 0, x > x_threshold} crossing downward.

    Returns (x_return, accepted_steps, status).
    """
    cdef double x = a, y = 0.0, h = 1e-3
    cdef double fx, fy, x2, y2, x3, y3, x4, y4, x5, y5, x6, y6, xn, yn
    cdef double k2x, k2y, k3x, k3y, k4x, k4y, k5x, k5y, k6x, k6y, k7x, k7y
    cdef double ex, ey, sx, sy, err, fac
    cdef double tiny = 1e-14 * (fabs(a) if fabs(a) > 1.0 else 1.0)
    cdef long steps = 0
    cdef int status = _NO_RETURN
    with nogil:
        fx = y - eps * _horner(Fc, x)
        fy = -_horner(gc, x)
        while steps < max_steps:
            x2 = x + h * _A21 * fx
            y2 = y + h * _A21 * fy
            k2x = y2 - eps * _horner(Fc, x2)
            k2y = -_horner(gc, x2)
            x3 = x + h * (_A31 * fx + _A32 * k2x)
            y3 = y + h * (_A31 * fy + _A32 * k2y)
            k3x = y3 - eps * _horner(Fc, x3)
            k3y = -_horner(gc, x3)
            x4 = x + h * (_A41 * fx + _A42 * k2x + _A43 * k3x)
            y4 = y + h * (_A41 * fy + _A42 * k2y + _A43 * k3y)
            k4x = y4 - eps * _horner(Fc, x4)
            k4y = -_horner(gc, x4)
            x5 = x + h * (_A51 * fx + _A52 * k2x + _A53 * k3x + _A54 * k4x)
            y5 = y + h * (_A51 * fy + _A52 * k2y + _A53 * k3y + _A54 * k4y)
            k5x = y5 - eps * _horner(Fc, x5)
            k5y = -_horner(gc, x5)
            x6 = x + h * (_A61 * fx + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
            y6 = y + h * (_A61 * fy + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
            k6x = y6 - eps * _horner(Fc, x6)
            k6y = -_horner(gc, x6)
            xn = x + h * (_B1 * fx + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
            yn = y + h * (_B1 * fy + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
            k7x = yn - eps * _horner(Fc, xn)
            k7y = -_horner(gc, xn)
            ex = h * (_E1 * fx + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
            ey = h * (_E1 * fy + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
            sx = atol + rtol * (fabs(x) if fabs(x) > fabs(xn) else fabs(xn))
            sy = atol + rtol * (fabs(y) if fabs(y) > fabs(yn) else fabs(yn))
            err = sqrt(0.5 * ((ex / sx) * (ex / sx) + (ey / sy) * (ey / sy)))
            if not isfinite(err):
                h *= 0.1
                if fabs(h) < tiny:
                    status = _UNDERFLOW
                    break
                continue
            if err <= 1.0:
                steps += 1
                if fabs(xn) > box or fabs(yn) > box:
                    x = xn
                    status = _UNBOUNDED
                    break
                if y > 0.0 and yn <= 0.0 and xn > x_threshold:
                    x = _henon(Fc, gc, eps, x, y)
                    status = _OK
                    break
                x = xn
                y = yn
                fx = k7x
                fy = k7y
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * pow(err, -0.2)
                    if fac > 5.0:
                        fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
            h *= fac
            if fabs(h) < tiny:
                status = _UNDERFLOW
                break
    return x, steps, status
