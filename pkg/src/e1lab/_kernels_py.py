"""Pure numpy implementations of the hot loops; the compiled module mirrors these."""

import math

import numpy as np

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi


def _w_rhs(r, w):
    return (2.0 * w**3 + 2.0 * w - SQRT3 * (1.0 + w * w) ** 1.5) / r


def _rk4(r, w, h):
    k1 = _w_rhs(r, w)
    k2 = _w_rhs(r + 0.5 * h, w + 0.5 * h * k1)
    k3 = _w_rhs(r + 0.5 * h, w + 0.5 * h * k2)
    k4 = _w_rhs(r + h, w + h * k3)
    return w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_w(r_start, w_start, r_end, h, err_guard, blowup):
    """RK4 step doubling for w' = w_rhs, with step halving near blow-up.

    Each step compares one RK4 step with two half steps; the half-step value
    is kept and their difference / 15 is its error estimate.

    Returns ``(r, w, status, info)`` with status 0 (reached r_end),
    1 (blow-up) or 2 (error guard failed on a regular step).
    """
    rs = [r_start]
    ws = [w_start]
    r, w = r_start, w_start
    step = h
    status = 0
    info = {"err": 0.0, "r_fail": math.nan, "halvings": 0}
    with np.errstate(all="ignore"):
        while r < r_end and status == 0:
            hs = min(step, r_end - r)
            adaptive = step < h
            while True:
                w1 = _rk4(r, w, hs)
                dw = abs(w1 - w)
                if not math.isfinite(w1) or dw >= 0.1 * max(abs(w), 1.0):
                    hs *= 0.5
                    adaptive = True
                    info["halvings"] += 1
                    if hs < 64.0 * math.ulp(r):
                        status = 1
                        break
                    continue
                wm = _rk4(r, w, 0.5 * hs)
                w2 = _rk4(r + 0.5 * hs, wm, 0.5 * hs)
                err = abs(w2 - w1) / 15.0
                if err > err_guard * max(1.0, abs(w)):
                    if adaptive:
                        hs *= 0.5
                        info["halvings"] += 1
                        if hs < 64.0 * math.ulp(r):
                            status = 1
                            break
                        continue
                    info["err"] = err
                    info["r_fail"] = r
                    status = 2
                    break
                info["err"] = max(info["err"], err)
                break
            if status != 0:
                break
            r = r + hs if r_end - r > hs else r_end
            w = w2
            rs.append(r)
            ws.append(w)
            if abs(w) > blowup:
                status = 1
                break
            step = min(h, 2.0 * hs) if adaptive else h
    return np.array(rs), np.array(ws), status, info


def _wrap(d):
    return np.mod(d + math.pi, TWO_PI) - math.pi


def _diff(Ua, Ub):
    """Ub - Ua with the angle component wrapped to [-pi, pi)."""
    d = Ub - Ua
    d[:, 0] = _wrap(d[:, 0])
    return d


def coefficients(r, phi, U):
    """Closed-form a = A^-1 B entries and b = A^-1 C U for every row of U.

    Returns ``(lam1, lam2, lam3, l21, l31, l41, l43, b)`` with b of shape (n, 4);
    singular nodes give non-finite values rather than raising.
    """
    with np.errstate(all="ignore"):
        s = np.sin(U[:, 0] - phi)
        c = np.cos(U[:, 0] - phi)
        al = U[:, 1]
        H = U[:, 2]
        sig = s * H / 3.0 + 2.0 * c * al
        eta = 2.0 * s * H / 3.0 + 2.0 * c * al
        lam1 = (-c * H / 3.0 + 2.0 * s * al) / (r * sig)
        lam2 = -c / (s * r)
        lam3 = (-2.0 * c * H / 3.0 + 2.0 * s * al) / (r * eta)
        l21 = -al * H / 3.0 / (s * r * sig)
        l31 = -10.0 * H * al * al / 3.0 / (r * sig * eta)
        l41 = (4.0 * s * al * al * H * H / 3.0 + 2.0 * c * al**3 * H / 3.0) / (s * r * sig * eta)
        l43 = -2.0 * al * H / 3.0 / (s * r * eta)
        p0 = al * al
        p1 = -2.0 * al * al
        p2 = -4.0 * al**3 - al * H * H
        p3 = -al * H * H
        ca = c * al
        ss = s * sig * eta
        b = np.empty((len(s), 4))
        b[:, 0] = (p0 - p1) / sig
        b[:, 1] = (ca * p0 + (sig - ca) * p1) / (s * sig)
        b[:, 2] = (10.0 * ca * al * p0 + (8.0 * sig * al - 10.0 * ca * al) * p1) / (sig * eta) - (p2 + p3) / eta
        b[:, 3] = (
            (-6.0 * eta * ca * al + 10.0 * ca * ca * al) * p0
            + (8.0 * sig * ca * al - 10.0 * ca * ca * al - 6.0 * sig * eta * al + 6.0 * eta * ca * al) * p1
        ) / ss + ((eta - ca) * p2 - ca * p3) / (s * eta)
    return lam1, lam2, lam3, l21, l31, l41, l43, b


def _apply_a(coef, d):
    lam1, lam2, lam3, l21, l31, l41, l43, _ = coef
    out = np.empty_like(d)
    out[:, 0] = lam1 * d[:, 0]
    out[:, 1] = l21 * d[:, 0] + lam2 * d[:, 1]
    out[:, 2] = l31 * d[:, 0] + lam3 * d[:, 2]
    out[:, 3] = l41 * d[:, 0] + l43 * d[:, 2] + lam2 * d[:, 3]
    return out


def lw_step(r, dr, phi, dphi, U):
    """One Richtmyer two-step Lax-Wendroff step of U_r + a U_phi + b = 0 on a periodic phi grid."""
    with np.errstate(all="ignore"):
        d = _diff(U, np.roll(U, -1, axis=0))
        Ubar = U + 0.5 * d
        coef = coefficients(r, phi + 0.5 * dphi, Ubar)
        Uh = Ubar - 0.5 * dr * (_apply_a(coef, d) / dphi + coef[-1])
        Uhm = np.roll(Uh, 1, axis=0)
        dh = _diff(Uhm, Uh)
        Ustar = Uhm + 0.5 * dh
        coef = coefficients(r + 0.5 * dr, phi, Ustar)
        return U - dr * (_apply_a(coef, dh) / dphi + coef[-1])


def upwind_step(r, dr, phi, dphi, U):
    """First-order upwind step, differencing each characteristic field along its own speed."""
    with np.errstate(all="ignore"):
        coef = coefficients(r, phi, U)
        lam1, lam2, lam3 = coef[0], coef[1], coef[2]
        al = U[:, 1]
        H = U[:, 2]
        back = _diff(np.roll(U, 1, axis=0), U)
        fwd = _diff(U, np.roll(U, -1, axis=0))

        def project(d):
            w = np.empty_like(d)
            w[:, 0] = d[:, 0]
            w[:, 1] = H / 6.0 * d[:, 0] + d[:, 1]
            w[:, 2] = 5.0 * al * d[:, 0] + d[:, 2]
            w[:, 3] = -al * H / 6.0 * d[:, 0] + H / 3.0 * d[:, 2] + d[:, 3]
            return w

        wb = project(back)
        wf = project(fwd)
        sgn = 1.0 if dr > 0 else -1.0
        lam = np.stack([lam1, lam2, lam3, lam2], axis=1)
        v = lam * np.where(lam * sgn > 0, wb, wf)
        out = np.empty_like(v)
        out[:, 0] = v[:, 0]
        out[:, 1] = -H / 6.0 * v[:, 0] + v[:, 1]
        out[:, 2] = -5.0 * al * v[:, 0] + v[:, 2]
        out[:, 3] = 11.0 * al * H / 6.0 * v[:, 0] - H / 3.0 * v[:, 2] + v[:, 3]
        return U - dr * (out / dphi + coef[-1])


def level_diagnostics(r, phi, U):
    """(max |lambda|, min |det A| / (1 + |A|_F), min |s|, min |alpha|) over one r-level."""
    with np.errstate(all="ignore"):
        s = np.sin(U[:, 0] - phi)
        c = np.cos(U[:, 0] - phi)
        al = U[:, 1]
        H = U[:, 2]
        sig = s * H / 3.0 + 2.0 * c * al
        eta = 2.0 * s * H / 3.0 + 2.0 * c * al
        det = s * s * sig * eta
        normA = np.sqrt(
            (s * H / 3.0 + c * al) ** 2
            + 5.0 * s * s
            + c * c * al * al
            + 36.0 * s * s * al * al
            + c * c * al * al
            + 4.0 * c * c * al**4
            + 4.0 * s * s * al * al
            + (2.0 * s * H / 3.0 + c * al) ** 2
        )
        lam1 = (-c * H / 3.0 + 2.0 * s * al) / (r * sig)
        lam2 = -c / (s * r)
        lam3 = (-2.0 * c * H / 3.0 + 2.0 * s * al) / (r * eta)
        sp = np.maximum(np.maximum(np.abs(lam1), np.abs(lam2)), np.abs(lam3))
        speed = np.max(sp) if np.all(np.isfinite(sp)) else math.nan
    return float(speed), float(np.min(np.abs(det) / (1.0 + normA))), float(np.min(np.abs(s))), float(np.min(np.abs(al)))
