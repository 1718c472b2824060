# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernels.

Mirrors ``_pykernels.py`` exactly (streams, draw order, arithmetic). All
loops run without the GIL so the engine can split paths over threads.
"""

from libc.math cimport log, log1p, expm1, exp, sqrt, cos, NAN, M_PI
from libc.stdint cimport uint64_t, int64_t, int8_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t PATH_MULT = 0xD1B54A32D192ED03ULL
cdef uint64_t SEED_SALT = 0x5851F42D4C957F2DULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 2.0 * M_PI

cdef enum:
    DET = 0
    EXP = 1
    GAMMA = 2
    UNIFORM = 3
    TILTED_UNIFORM = 4

cdef enum:
    OK = 0
    CAPPED = 1
    ABANDONED = 2
    HORIZON = 3
    BAD_JUMP = 4

# basis encoding offsets
cdef enum:
    E_MODE = 0
    E_C = 1
    E_FIRST = 2
    E_T = 3
    E_X = 7
    E_Y = 11
    E_F = 15


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef struct Stream:
    uint64_t s


cdef inline void stream_init(Stream* rng, uint64_t seed, uint64_t index) noexcept nogil:
    cdef uint64_t key = mix64(seed ^ SEED_SALT)
    rng.s = mix64(key + (index + 1) * PATH_MULT)


cdef inline double u01(Stream* rng) noexcept nogil:
    rng.s = rng.s + GOLDEN
    return (<double>(mix64(rng.s) >> 11) + 0.5) * INV_2_53


cdef inline double std_normal(Stream* rng) noexcept nogil:
    cdef double u1 = u01(rng)
    cdef double u2 = u01(rng)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef double std_gamma(double a, Stream* rng) noexcept nogil:
    cdef double d, c, x, v, u, g
    if a < 1.0:
        g = std_gamma(a + 1.0, rng)
        return g * exp(log(u01(rng)) / a)
    d = a - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        x = std_normal(rng)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = u01(rng)
        if u < 1.0 - 0.0331 * (x * x) * (x * x):
            return d * v
        if log(u) < 0.5 * x * x + d * (1.0 - v + log(v)):
            return d * v


cdef inline double draw(const double* d, Stream* rng) noexcept nogil:
    cdef int code = <int>d[0]
    cdef double p1 = d[1]
    cdef double p2 = d[2]
    cdef double th
    if code == EXP:
        return -log(u01(rng)) / p1
    if code == GAMMA:
        return std_gamma(p1, rng) / p2
    if code == UNIFORM:
        return p1 + (p2 - p1) * u01(rng)
    if code == TILTED_UNIFORM:
        th = d[3]
        return p1 + log1p(u01(rng) * expm1(th * (p2 - p1))) / th
    return p1


cdef inline double draw_equilibrium(const double* d, Stream* rng) noexcept nogil:
    cdef int code = <int>d[0]
    cdef double p1 = d[1]
    cdef double p2 = d[2]
    cdef double sb
    if code == EXP:
        sb = std_gamma(2.0, rng) / p1
    elif code == GAMMA:
        sb = std_gamma(p1 + 1.0, rng) / p2
    elif code == UNIFORM:
        sb = sqrt(p1 * p1 + u01(rng) * (p2 * p2 - p1 * p1))
    else:
        sb = p1
    return u01(rng) * sb


cdef inline double draw_t(const double* enc, Stream* rng, bint first) noexcept nogil:
    cdef int fm = <int>enc[E_FIRST]
    if first and fm == 1:
        return draw(enc + E_F, rng)
    if first and fm == 2:
        return draw_equilibrium(enc + E_T, rng)
    return draw(enc + E_T, rng)


cdef inline void draw_pair(const double* enc, Stream* rng, bint first, double* t, double* x) noexcept nogil:
    cdef double y
    cdef int fm
    if enc[E_MODE] == 1:
        x[0] = draw(enc + E_X, rng)
        y = draw(enc + E_Y, rng)
        t[0] = y - enc[E_C] * x[0]
        return
    fm = <int>enc[E_FIRST]
    if first and fm == 1:
        t[0] = draw(enc + E_F, rng)
    elif first and fm == 2:
        t[0] = draw_equilibrium(enc + E_T, rng)
    else:
        t[0] = draw(enc + E_T, rng)
    x[0] = draw(enc + E_X, rng)


def run_paths(const double[::1] enc, double level, uint64_t seed, Py_ssize_t start, Py_ssize_t stop,
              int64_t cap, double abandon_below, double stop_sum, double tsup_margin,
              int8_t[::1] status, int64_t[::1] n_inf, double[::1] s_inf, double[::1] s_sup,
              int64_t[::1] n_tsup, double[::1] s_tsup):
    cdef Py_ssize_t i
    cdef Stream rng
    cdef double v, s, t = 0.0, x = 0.0, ws, wv, last_s
    cdef int64_t n, m, last_n
    cdef int st
    cdef const double* e = &enc[0]
    with nogil:
        for i in range(start, stop):
            stream_init(&rng, seed, <uint64_t>i)
            v = 0.0
            s = 0.0
            n = 0
            st = CAPPED
            while n < cap:
                n += 1
                draw_pair(e, &rng, n == 1, &t, &x)
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
                s_tsup[i - start] = NAN
                continue
            s_sup[i - start] = s - x
            last_n = n - 1
            last_s = s - x
            if tsup_margin < 0.0:
                last_n = -1
                last_s = NAN
            elif tsup_margin > 0.0:
                m = n
                ws = s
                wv = v
                while wv <= level + tsup_margin:
                    if m >= cap:
                        last_n = -1
                        last_s = NAN
                        break
                    m += 1
                    draw_pair(e, &rng, False, &t, &x)
                    wv += t
                    ws += x
                    if wv <= level:
                        last_n = m
                        last_s = ws
            n_tsup[i - start] = last_n
            s_tsup[i - start] = last_s


def ladder_walk(const double[::1] enc, double level, uint64_t seed, Py_ssize_t start, Py_ssize_t stop,
                int64_t cap, double[::1] buf_t, double[::1] buf_x, int64_t[::1] buf_len, Py_ssize_t used,
                int64_t[::1] path_first, int64_t[::1] path_nblocks, int8_t[::1] path_status,
                int64_t[::1] path_ninf, double[::1] path_sinf):
    cdef Py_ssize_t size = buf_t.shape[0]
    cdef Py_ssize_t i
    cdef Stream rng
    cdef double v, s, rec, bt, bx, t = 0.0, x = 0.0
    cdef int64_t blen, nb, n
    cdef int st
    cdef const double* e = &enc[0]
    with nogil:
        for i in range(start, stop):
            if used + 1 > size:
                with gil:
                    return i, used
            stream_init(&rng, seed, <uint64_t>i)
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
                draw_pair(e, &rng, n == 1, &t, &x)
                v += t
                s += x
                bt += t
                bx += x
                blen += 1
                if v > rec:
                    if used >= size:
                        with gil:
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
                    with gil:
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


def garbage_walk(const double[::1] enc, double level, uint64_t seed, Py_ssize_t start, Py_ssize_t stop,
                 int64_t n_center, int64_t jump_m0, double jump_shape, double jump_rate, double mu_x,
                 int64_t cap, double[::1] g_out, int64_t[::1] nsup_out, int8_t[::1] status):
    cdef Py_ssize_t i
    cdef Stream rng
    cdef double v, acc
    cdef int64_t n, n_sup, k, j
    cdef int st
    cdef const double* e = &enc[0]
    with nogil:
        for i in range(start, stop):
            stream_init(&rng, seed, <uint64_t>i)
            v = 0.0
            n = 0
            if jump_m0 > 0:
                if jump_rate > 0.0:
                    v = std_gamma(jump_shape, &rng) / jump_rate
                else:
                    v = jump_shape
                n = jump_m0
            if v > level:
                status[i - start] = BAD_JUMP
                g_out[i - start] = NAN
                nsup_out[i - start] = -1
                continue
            st = CAPPED
            while n - jump_m0 < cap:
                n += 1
                v += draw_t(e, &rng, n == 1)
                if v > level:
                    st = OK
                    break
            status[i - start] = st
            if st != OK:
                g_out[i - start] = NAN
                nsup_out[i - start] = -1
                continue
            n_sup = n - 1
            k = n_sup - n_center
            acc = 0.0
            for j in range(k if k >= 0 else -k):
                acc += draw(e + E_X, &rng) - mu_x
            nsup_out[i - start] = n_sup
            g_out[i - start] = acc if k >= 0 else -acc


def spitzer_walk(const double[::1] enc, int64_t n_max, uint64_t seed, Py_ssize_t start, Py_ssize_t stop,
                 bint positive, int64_t[::1] counts, double[::1] weights):
    cdef Py_ssize_t i
    cdef int64_t n
    cdef Stream rng
    cdef double v, w, t = 0.0, x = 0.0
    cdef bint hit
    cdef const double* e = &enc[0]
    with nogil:
        for i in range(start, stop):
            stream_init(&rng, seed, <uint64_t>i)
            v = 0.0
            w = 0.0
            for n in range(1, n_max + 1):
                draw_pair(e, &rng, False, &t, &x)
                v += t
                if positive:
                    hit = v > 0.0
                else:
                    hit = v <= 0.0
                if hit:
                    counts[n - 1] += 1
                    w += 1.0 / n
            weights[i - start] = w


cdef inline int next_state(const double[:, ::1] pcum, int k, int state, Stream* rng) noexcept nogil:
    cdef double u = u01(rng)
    cdef int j = 0
    while j < k - 1 and u >= pcum[state, j]:
        j += 1
    return j


def markov_walk(const double[:, ::1] pcum, const double[:, :, ::1] tdist, const double[:, :, ::1] xdist,
                int k, int init_state, double level, uint64_t seed, Py_ssize_t start, Py_ssize_t stop,
                int64_t cap, int8_t[::1] status, int64_t[::1] n_inf, double[::1] s_inf):
    cdef Py_ssize_t i
    cdef Stream rng
    cdef int state, nxt, st
    cdef double v, s, t, x
    cdef int64_t n
    with nogil:
        for i in range(start, stop):
            stream_init(&rng, seed, <uint64_t>i)
            state = init_state
            v = 0.0
            s = 0.0
            n = 0
            st = CAPPED
            while n < cap:
                n += 1
                nxt = next_state(pcum, k, state, &rng)
                t = draw(&tdist[state, nxt, 0], &rng)
                x = draw(&xdist[state, nxt, 0], &rng)
                state = nxt
                v += t
                s += x
                if v > level:
                    st = OK
                    break
            status[i - start] = st
            n_inf[i - start] = n
            s_inf[i - start] = s


def markov_blocks(const double[:, ::1] pcum, const double[:, :, ::1] tdist, const double[:, :, ::1] xdist,
                  int k, int init_state, int ref_state, Py_ssize_t n_blocks, uint64_t seed,
                  Py_ssize_t start, Py_ssize_t stop, int64_t cap,
                  int64_t[:, ::1] tau_out, double[:, ::1] t_out, double[:, ::1] x_out, int8_t[::1] status):
    cdef Py_ssize_t r, b
    cdef Stream rng
    cdef int state, nxt, st
    cdef int64_t tau
    cdef double bt, bx
    with nogil:
        for r in range(start, stop):
            stream_init(&rng, seed, <uint64_t>r)
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
                    nxt = next_state(pcum, k, state, &rng)
                    bt += draw(&tdist[state, nxt, 0], &rng)
                    bx += draw(&xdist[state, nxt, 0], &rng)
                    state = nxt
                    tau += 1
                    if state == ref_state:
                        break
                tau_out[r - start, b] = tau
                t_out[r - start, b] = bt
                x_out[r - start, b] = bx
                if st != OK:
                    break
            status[r - start] = st
