"""Pure-Python simulation kernels.

Statement-for-statement mirror of ``_kernels.pyx``: same random streams,
same draw order, same arithmetic, so both backends return the same numbers.
Used when the compiled extension is unavailable or COMPSUM_BACKEND=python.
"""

import math

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
PATH_MULT = 0xD1B54A32D192ED03
SEED_SALT = 0x5851F42D4C957F2D
INV_2_53 = 1.0 / 9007199254740992.0
TWO_PI = 2.0 * math.pi

DET, EXP, GAMMA, UNIFORM, TILTED_UNIFORM = 0, 1, 2, 3, 4
OK, CAPPED, ABANDONED, HORIZON, BAD_JUMP = 0, 1, 2, 3, 4

# basis encoding offsets
E_MODE, E_C, E_FIRST, E_T, E_X, E_Y, E_F = 0, 1, 2, 3, 7, 11, 15


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class Stream:
    __slots__ = ("s",)

    def __init__(self, seed, index):
        key = mix64((seed & MASK) ^ SEED_SALT)
        self.s = mix64((key + ((index + 1) * PATH_MULT)) & MASK)

    def u01(self):
        self.s = (self.s + GOLDEN) & MASK
        return ((mix64(self.s) >> 11) + 0.5) * INV_2_53


def std_normal(rng):
    u1 = rng.u01()
    u2 = rng.u01()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)


def std_gamma(a, rng):
    if a < 1.0:
        g = std_gamma(a + 1.0, rng)
        return g * math.exp(math.log(rng.u01()) / a)
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = std_normal(rng)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.u01()
        if u < 1.0 - 0.0331 * (x * x) * (x * x):
            return d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


def draw(enc, off, rng):
    code = enc[off]
    p1 = enc[off + 1]
    p2 = enc[off + 2]
    if code == EXP:
        return -math.log(rng.u01()) / p1
    if code == GAMMA:
        return std_gamma(p1, rng) / p2
    if code == UNIFORM:
        return p1 + (p2 - p1) * rng.u01()
    if code == TILTED_UNIFORM:
        th = enc[off + 3]
        return p1 + math.log1p(rng.u01() * math.expm1(th * (p2 - p1))) / th
    return p1


def draw_equilibrium(enc, off, rng):
    # U * (size-biased draw)
    code = enc[off]
    p1 = enc[off + 1]
    p2 = enc[off + 2]
    if code == EXP:
        sb = std_gamma(2.0, rng) / p1
    elif code == GAMMA:
        sb = std_gamma(p1 + 1.0, rng) / p2
    elif code == UNIFORM:
        sb = math.sqrt(p1 * p1 + rng.u01() * (p2 * p2 - p1 * p1))
    else:
        sb = p1
    return rng.u01() * sb


def draw_t(enc, rng, first):
    fm = enc[E_FIRST]
    if first and fm == 1:
        return draw(enc, E_F, rng)
    if first and fm == 2:
        return draw_equilibrium(enc, E_T, rng)
    return draw(enc, E_T, rng)


def draw_pair(enc, rng, first):
    """Returns (t, x) for one summand."""
    if enc[E_MODE] == 1:
        x = draw(enc, E_X, rng)
        y = draw(enc, E_Y, rng)
        return y - enc[E_C] * x, x
    fm = enc[E_FIRST]
    if first and fm == 1:
        t = draw(enc, E_F, rng)
    elif first and fm == 2:
        t = draw_equilibrium(enc, E_T, rng)
    else:
        t = draw(enc, E_T, rng)
    x = draw(enc, E_X, rng)
    return t, x


def run_paths(enc, level, seed, start, stop, cap, abandon_below, stop_sum, tsup_margin,
              status, n_inf, s_inf, s_sup, n_tsup, s_tsup):
    for i in range(start, stop):
        rng = Stream(seed, i)
        v = 0.0
        s = 0.0
        n = 0
        st = CAPPED
        while n < cap:
            n += 1
            t, x = draw_pair(enc, rng, n == 1)
            v += t
            s += x
            if v > level:
                st = OK
                break
            if v < abandon_below:
                st = ABANDONED
                break
            if s > stop_sum:
                st = HORIZON
                break
        status[i - start] = st
        n_inf[i - start] = n
        s_inf[i - start] = s
        if st != OK:
            s_sup[i - start] = s
            n_tsup[i - start] = -1
            s_tsup[i - start] = math.nan
            continue
        s_sup[i - start] = s - x
        last_n = n - 1
        last_s = s - x
        if tsup_margin < 0.0:
            last_n = -1
            last_s = math.nan
        elif tsup_margin > 0.0:
            # walk on until the level is left behind by the margin
            m = n
            ws = s
            wv = v
            while wv <= level + tsup_margin:
                if m >= cap:
                    last_n = -1
                    last_s = math.nan
                    break
                m += 1
                t, x = draw_pair(enc, rng, False)
                wv += t
                ws += x
                if wv <= level:
                    last_n = m
                    last_s = ws
        n_tsup[i - start] = last_n
        s_tsup[i - start] = last_s


def ladder_walk(enc, level, seed, start, stop, cap, buf_t, buf_x, buf_len, used,
                path_first, path_nblocks, path_status, path_ninf, path_sinf):
    """Ladder (record) blocks up to the first passage of ``level``.

    Writes blocks into the flat buffers from position ``used`` on; stops early
    when the buffer might overflow and returns (next_path, used).
    """
    size = len(buf_t)
    for i in range(start, stop):
        if used + 1 > size:
            return i, used
        rng = Stream(seed, i)
        path_first[i - start] = used
        v = 0.0
        s = 0.0
        rec = 0.0
        bt = 0.0
        bx = 0.0
        blen = 0
        nb = 0
        n = 0
        st = CAPPED
        while n < cap:
            n += 1
            t, x = draw_pair(enc, rng, n == 1)
            v += t
            s += x
            bt += t
            bx += x
            blen += 1
            if v > rec:
                if used >= size:
                    return i, path_first[i - start]
                buf_t[used] = bt
                buf_x[used] = bx
                buf_len[used] = blen
                used += 1
                nb += 1
                rec = v
                bt = 0.0
                bx = 0.0
                blen = 0
                if v > level:
                    st = OK
                    break
        if st != OK and blen > 0:
            if used >= size:
                return i, path_first[i - start]
            buf_t[used] = bt
            buf_x[used] = bx
            buf_len[used] = -blen
            used += 1
            nb += 1
        path_nblocks[i - start] = nb
        path_status[i - start] = st
        path_ninf[i - start] = n
        path_sinf[i - start] = s
    return stop, used


def garbage_walk(enc, level, seed, start, stop, n_center, jump_m0, jump_shape, jump_rate, mu_x,
                 cap, g_out, nsup_out, status):
    """G = sum of centred X between n_center and N_sup, signed (direct form only).

    The T walk may start with an exact jump to V_{m0}; X only matters on the
    indices between the two counts, so just |N_sup - n_center| of them are drawn.
    """
    for i in range(start, stop):
        rng = Stream(seed, i)
        v = 0.0
        n = 0
        if jump_m0 > 0:
            if jump_rate > 0.0:
                v = std_gamma(jump_shape, rng) / jump_rate
            else:
                v = jump_shape
            n = jump_m0
        if v > level:
            status[i - start] = BAD_JUMP
            g_out[i - start] = math.nan
            nsup_out[i - start] = -1
            continue
        st = CAPPED
        while n - jump_m0 < cap:
            n += 1
            v += draw_t(enc, rng, n == 1)
            if v > level:
                st = OK
                break
        status[i - start] = st
        if st != OK:
            g_out[i - start] = math.nan
            nsup_out[i - start] = -1
            continue
        n_sup = n - 1
        k = n_sup - n_center
        acc = 0.0
        for _ in range(abs(k)):
            acc += draw(enc, E_X, rng) - mu_x
        nsup_out[i - start] = n_sup
        g_out[i - start] = acc if k >= 0 else -acc


def spitzer_walk(enc, n_max, seed, start, stop, positive, counts, weights):
    for i in range(start, stop):
        rng = Stream(seed, i)
        v = 0.0
        w = 0.0
        for n in range(1, n_max + 1):
            t, x = draw_pair(enc, rng, False)
            v += t
            hit = v > 0.0 if positive else v <= 0.0
            if hit:
                counts[n - 1] += 1
                w += 1.0 / n
        weights[i - start] = w


def _next_state(pcum, k, state, rng):
    u = rng.u01()
    j = 0
    while j < k - 1 and u >= pcum[state][j]:
        j += 1
    return j


def _draw_coded(d, rng):
    return draw(d, 0, rng)


def markov_walk(pcum, tdist, xdist, k, init_state, level, seed, start, stop, cap,
                status, n_inf, s_inf):
    for i in range(start, stop):
        rng = Stream(seed, i)
        state = init_state
        v = 0.0
        s = 0.0
        n = 0
        st = CAPPED
        while n < cap:
            n += 1
            nxt = _next_state(pcum, k, state, rng)
            t = _draw_coded(tdist[state][nxt], rng)
            x = _draw_coded(xdist[state][nxt], rng)
            state = nxt
            v += t
            s += x
            if v > level:
                st = OK
                break
        status[i - start] = st
        n_inf[i - start] = n
        s_inf[i - start] = s


def markov_blocks(pcum, tdist, xdist, k, init_state, ref_state, n_blocks, seed, start, stop, cap,
                  tau_out, t_out, x_out, status):
    """Regeneration blocks of replicate trajectories; column 0 is the initial block."""
    for r in range(start, stop):
        rng = Stream(seed, r)
        state = init_state
        st = OK
        for b in range(n_blocks + 1):
            tau = 0
            bt = 0.0
            bx = 0.0
            while True:
                if tau >= cap:
                    st = CAPPED
                    break
                nxt = _next_state(pcum, k, state, rng)
                bt += _draw_coded(tdist[state][nxt], rng)
                bx += _draw_coded(xdist[state][nxt], rng)
                state = nxt
                tau += 1
                if state == ref_state:
                    break
            tau_out[r - start][b] = tau
            t_out[r - start][b] = bt
            x_out[r - start][b] = bx
            if st != OK:
                break
        status[r - start] = st
