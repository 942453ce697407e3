"""Certified evaluation of the oscillatory integrals against d li.

The quantity computed here is I(a, b, t) = integral of u^{-it} (1 - 1/u)
/ log u over [a, b].  Substituting u = e^v turns the weight into the
entire function phi(v) = (e^v - 1)/v, so

    I = integral of e^{-i t v} phi(v) dv over [log a, log b].

The range is split into pieces short enough that a degree-J Taylor
expansion of phi at the piece centre is tight; the oscillatory factor is
never expanded in v.  Instead the piece integral becomes a combination
of moments  integral s^j e^{-its} ds  over symmetric intervals, each
evaluated by its everywhere-convergent series in (-it) with an explicit
geometric tail.  All arithmetic is outward-rounded interval arithmetic
at a fixed working precision; the result is a rigid box (no refinement
hook), whose width is far below what the event thresholds need.
"""

from __future__ import annotations

import math
from typing import Tuple

from mpmath.libmp import (
    from_float,
    from_int,
    fzero,
    mpf_cmp,
    mpf_neg,
    mpi_abs,
    mpi_add,
    mpi_cos_sin,
    mpi_div,
    mpi_mul,
    mpi_neg,
    mpi_sub,
)

from .certreal import CertComplex, CertReal, CertRealLike, as_certreal
from .logint import _phi_deriv_raw, li

_HALF = (from_float(0.5), from_float(0.5))

RawIv = Tuple[tuple, tuple]
RawBox = Tuple[RawIv, RawIv]


def _iv(x) -> RawIv:
    return (x, x)


def _c_add(a: RawBox, b: RawBox, wp) -> RawBox:
    return (mpi_add(a[0], b[0], wp), mpi_add(a[1], b[1], wp))


def _c_mul(a: RawBox, b: RawBox, wp) -> RawBox:
    re = mpi_sub(mpi_mul(a[0], b[0], wp), mpi_mul(a[1], b[1], wp), wp)
    im = mpi_add(mpi_mul(a[0], b[1], wp), mpi_mul(a[1], b[0], wp), wp)
    return (re, im)


def _c_scale(a: RawBox, s: RawIv, wp) -> RawBox:
    return (mpi_mul(a[0], s, wp), mpi_mul(a[1], s, wp))


def _pad_disk(box: RawBox, radius_hi, wp) -> RawBox:
    pad = (mpf_neg(radius_hi), radius_hi)
    return (mpi_add(box[0], pad, wp), mpi_add(box[1], pad, wp))


def _mag(raw) -> float:
    from mpmath.libmp import to_float
    try:
        return abs(to_float(raw, rnd="n"))
    except (OverflowError, ValueError):
        return math.inf


def _phi_derivs_upto(c_iv: RawIv, jmax: int, prec: int):
    """phi^(j)(c) for j = 0..jmax in one pass over the shared series.

    phi^(j)(v) = sum_r v^r / (r! (r+j+1)); the factor v^r/r! is common.
    """
    wp = prec + 24
    sums = [(fzero, fzero) for _ in range(jmax + 1)]
    p = _iv(from_int(1))  # v^r / r!
    vmax = max(_mag(c_iv[0]), _mag(c_iv[1]))
    r = 0
    while True:
        for j in range(jmax + 1):
            t = mpi_div(p, _iv(from_int(r + j + 1)), wp)
            sums[j] = mpi_add(sums[j], t, wp)
        r += 1
        p = mpi_div(mpi_mul(p, c_iv, wp), _iv(from_int(r)), wp)
        pmag = _mag(mpi_abs(p, wp)[1])
        if r > 2 * vmax + 2 and pmag < 2.0 ** (-(prec + 12)):
            break
        if r > 10 * max(vmax, 8.0) + 4 * wp:
            raise RuntimeError("phi multi-derivative series stalled")
    # tail per j is bounded by the last common factor (ratio <= 1/2)
    tail = mpi_abs(p, wp)[1]
    return [mpi_add(s, (mpf_neg(tail), tail), wp) for s in sums]


class _PieceContext:
    """Per-piece data shared across every frequency t.

    Holds the exact midpoint and half-length, the Taylor coefficients of
    phi at the midpoint, the remainder scale, and a lazily grown table
    of moment scale factors 2 h^{p} / p.
    """

    __slots__ = ("c", "h", "hf", "coeffs", "rem_pad", "scales", "wp", "J")

    def __init__(self, p_raw, q_raw, J: int, prec: int):
        wp = prec + 24
        self.wp = wp
        self.J = J
        self.c = mpi_mul(mpi_add(_iv(p_raw), _iv(q_raw), 0), _HALF, 0)
        self.h = mpi_mul(mpi_sub(_iv(q_raw), _iv(p_raw), 0), _HALF, 0)
        self.hf = _mag(self.h[1])
        derivs = _phi_derivs_upto(self.c, J, prec)
        fact = 1
        self.coeffs = []
        for j in range(J + 1):
            if j:
                fact *= j
            self.coeffs.append(mpi_div(derivs[j], _iv(from_int(fact)), wp))
        # remainder: |R(s)| <= phi^(J+1)(q)/(J+1)! |s|^{J+1}; phi
        # derivatives are positive and increasing for v > 0
        rem_top = _phi_deriv_raw(_iv(q_raw), J + 1, prec)
        hp_rem = self.h
        for _ in range(J + 1):
            hp_rem = mpi_mul(hp_rem, self.h, wp)  # h^{J+2}
        rem = mpi_div(mpi_mul(mpi_mul(_iv(from_int(2)), hp_rem, wp), rem_top, wp),
                      _iv(from_int(fact * (J + 1) * (J + 2))), wp)
        self.rem_pad = mpi_abs(rem, wp)[1]
        self._grow_scales(J + 2)

    def _grow_scales(self, upto: int):
        scales = getattr(self, "scales", None)
        if scales is None:
            self.scales = scales = [None, mpi_mul(_iv(from_int(2)), self.h, 0)]
        hp = None
        while len(scales) <= upto:
            p = len(scales)
            # 2 h^p / p, built from 2 h^{p-1}/(p-1) to stay incremental
            prev = scales[-1]
            cur = mpi_div(mpi_mul(mpi_mul(prev, self.h, self.wp),
                                  _iv(from_int(p - 1)), self.wp),
                          _iv(from_int(p)), self.wp)
            scales.append(cur)

    def scale(self, p: int):
        if p >= len(self.scales):
            self._grow_scales(p + 4)
        return self.scales[p]

    def integral_for(self, t_iv: RawIv, tf: float, prec: int) -> RawBox:
        """Certified piece integral of e^{-itv} phi(v) for one frequency."""
        wp = self.wp
        J = self.J
        hf = self.hf
        moments = [((fzero, fzero), (fzero, fzero)) for _ in range(J + 1)]
        z: RawBox = (_iv(from_int(1)), (fzero, fzero))  # (-it)^l / l!
        neg_it: RawBox = ((fzero, fzero), mpi_neg(t_iv, wp))
        zmag = 1.0
        l = 0
        th = abs(tf) * hf
        while True:
            for j in range(J + 1):
                if (j + l) % 2 == 0:
                    moments[j] = _c_add(moments[j],
                                        _c_scale(z, self.scale(j + l + 1), wp), wp)
            l += 1
            z = _c_mul(z, neg_it, wp)
            z = (mpi_div(z[0], _iv(from_int(l)), wp),
                 mpi_div(z[1], _iv(from_int(l)), wp))
            zmag = zmag * max(abs(tf), 1e-300) / l
            if l > 2 * th + 4 and zmag * 2 * max(hf, 1.0) < 2.0 ** (-(prec + 8)):
                break
            if l > 40 * (th + 2) + 200:
                raise RuntimeError("oscillatory moment series stalled")
        total: RawBox = ((fzero, fzero), (fzero, fzero))
        for j in range(J + 1):
            # geometric tail of the moment series (ratio <= 1/2 past stop)
            tail_f = 4.0 * zmag * hf ** (j + 1) * max(2.0 * hf / (j + 2), 1e-30)
            tail = from_float(tail_f if math.isfinite(tail_f) else 1e300)
            mj = _pad_disk(moments[j], tail, wp)
            total = _c_add(total, _c_scale(mj, self.coeffs[j], wp), wp)
        total = _pad_disk(total, self.rem_pad, wp)
        tc = mpi_mul(t_iv, self.c, wp)
        cos_tc, sin_tc = mpi_cos_sin(tc, wp)
        phase: RawBox = (cos_tc, mpi_neg(sin_tc, wp))
        return _c_mul(phase, total, wp)


def _piece_integral(p_raw, q_raw, t_iv: RawIv, tf: float, J: int,
                    prec: int) -> RawBox:
    return _PieceContext(p_raw, q_raw, J, prec).integral_for(t_iv, tf, prec)


def li_oscillatory(a: CertRealLike, b: CertRealLike, t: CertRealLike,
                   prec: int = 160, J: int = 12,
                   max_piece: float = 0.45, max_th: float = 14.0) -> CertComplex:
    """Certified box for the integral of u^{-it} d li(u) over [a, b].

    ``a <= b`` with a >= 1 assumed; a real t (exact zero routes through
    the plain li difference).  The working precision is fixed: the box
    is what it is, further refinement re-runs the whole quadrature.
    """
    a = as_certreal(a)
    b = as_certreal(b)
    t = as_certreal(t)
    if t.is_exact and t.to_fraction() == 0:
        diff = li(b) - li(a)
        return CertComplex(CertReal(None, diff.enclosure(prec)), 0)

    wp = prec + 24
    va = a.log().enclosure(prec)
    vb = b.log().enclosure(prec)
    t_iv = t.enclosure(prec)
    tf = t.to_float()

    w0, w1 = va[1], vb[0]  # exact dyadic inner endpoints
    if mpf_cmp(w0, w1) >= 0:
        # degenerate range: enclose by total variation of li across it
        hull = li(b) - li(a)
        rad = mpi_abs(hull.enclosure(prec), wp)[1]
        box = _pad_disk(((fzero, fzero), (fzero, fzero)), rad, wp)
        return CertComplex(CertReal(None, box[0]), CertReal(None, box[1]))

    w0f, w1f = _signed_float(w0), _signed_float(w1)
    length = w1f - w0f
    pieces = max(1, math.ceil(length / max_piece),
                 math.ceil(abs(tf) * length / max_th))
    cuts = [w0]
    for i in range(1, pieces):
        cuts.append(from_float(w0f + length * i / pieces))
    cuts.append(w1)

    total: RawBox = ((fzero, fzero), (fzero, fzero))
    for i in range(pieces):
        piece = _piece_integral(cuts[i], cuts[i + 1], t_iv, tf, J, prec)
        total = _c_add(total, piece, wp)

    # endpoint slack: the exact limits live inside the enclosures of
    # log a and log b; |phi| is monotone, so the missed mass is at most
    # width * phi(upper end)
    phi_hi = _phi_deriv_raw(_iv(vb[1]), 0, prec)
    for (lo, hi) in (va, vb):
        width = mpi_sub(_iv(hi), _iv(lo), wp)
        rad = mpi_abs(mpi_mul(width, phi_hi, wp), wp)[1]
        total = _pad_disk(total, rad, wp)

    return CertComplex(CertReal(None, total[0]), CertReal(None, total[1]))


def _signed_float(raw) -> float:
    from mpmath.libmp import to_float
    return to_float(raw, rnd="n")


def box_integral_table(grid: list, t_values: list, prec: int = 128,
                       J: int = 8, max_piece: float = 0.3,
                       max_th: float = 7.0) -> list:
    """Certified boxes for the integrals over consecutive grid spans.

    ``grid`` is the increasing list of certified abscissas; the result is
    ``table[n][i]`` = box for the integral of u^{-i t_i} d li(u) over
    [grid[n], grid[n+1]].  Piece geometry and Taylor data are shared
    across every frequency, which is what makes dense (k, m) sweeps
    affordable.  Endpoint-enclosure slack is folded into each box.
    """
    wp = prec + 24
    t_ivs = [as_certreal(t).enclosure(prec) for t in t_values]
    t_fs = [as_certreal(t).to_float() for t in t_values]
    t_absmax = max((abs(t) for t in t_fs), default=0.0)
    logs = [g.log().enclosure(prec) for g in grid]
    table = []
    for n in range(len(grid) - 1):
        va, vb = logs[n], logs[n + 1]
        w0, w1 = va[1], vb[0]
        boxes = []
        if mpf_cmp(w0, w1) >= 0:
            hull = li(grid[n + 1]) - li(grid[n])
            rad = mpi_abs(hull.enclosure(prec), wp)[1]
            empty = _pad_disk(((fzero, fzero), (fzero, fzero)), rad, wp)
            table.append([empty for _ in t_values])
            continue
        w0f, w1f = _signed_float(w0), _signed_float(w1)
        length = w1f - w0f
        pieces = max(1, math.ceil(length / max_piece),
                     math.ceil(t_absmax * length / max_th))
        cuts = [w0]
        for i in range(1, pieces):
            cuts.append(from_float(w0f + length * i / pieces))
        cuts.append(w1)
        contexts = [_PieceContext(cuts[i], cuts[i + 1], J, prec)
                    for i in range(pieces)]
        phi_hi = _phi_deriv_raw(_iv(vb[1]), 0, prec)
        slack = fzero
        for (lo, hi) in (va, vb):
            width = mpi_sub(_iv(hi), _iv(lo), wp)
            rad = mpi_abs(mpi_mul(width, phi_hi, wp), wp)[1]
            slack = mpi_add(_iv(slack), _iv(rad), wp)[1]
        for t_iv, tf in zip(t_ivs, t_fs):
            box: RawBox = ((fzero, fzero), (fzero, fzero))
            for ctx in contexts:
                box = _c_add(box, ctx.integral_for(t_iv, tf, prec), wp)
            boxes.append(_pad_disk(box, slack, wp))
        table.append(boxes)
    return table


def raw_box_to_certcomplex(box: RawBox) -> CertComplex:
    return CertComplex(CertReal(None, box[0]), CertReal(None, box[1]))


def accumulate_boxes(boxes: list, prec: int = 128) -> list:
    """Prefix sums of raw complex boxes: out[k] = sum of boxes[:k]."""
    wp = prec + 24
    out = [((fzero, fzero), (fzero, fzero))]
    for b in boxes:
        out.append(_c_add(out[-1], b, wp))
    return out
