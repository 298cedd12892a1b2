"""Deliberately naive field arithmetic, used as an oracle for the tables.

Elements are lists of base digits; base digits multiply by schoolbook
carry-less multiplication reduced by the base modulus bit mask.
"""

BASE_MASKS = {2: 0b11, 4: 0b111, 16: 0b10011}


def base_mul(q, a, b):
    mod = BASE_MASKS[q]
    deg = mod.bit_length() - 1
    acc = 0
    for i in range(deg):
        if (b >> i) & 1:
            acc ^= a << i
    for i in range(2 * deg, deg - 1, -1):
        if (acc >> i) & 1:
            acc ^= mod << (i - deg)
    return acc


def digits(q, t, code):
    bits = q.bit_length() - 1
    return [(code >> (m * bits)) & (q - 1) for m in range(t)]


def undigits(q, ds):
    bits = q.bit_length() - 1
    return sum(d << (m * bits) for m, d in enumerate(ds))


def ext_mul(q, t, modulus, a, b):
    """Product of codes a, b in GF(q)[x]/(modulus), modulus lowest degree first and monic."""
    da, db = digits(q, t, a), digits(q, t, b)
    prod = [0] * (2 * t - 1)
    for i, x in enumerate(da):
        for j, y in enumerate(db):
            prod[i + j] ^= base_mul(q, x, y)
    for d in range(2 * t - 2, t - 1, -1):
        c = prod[d]
        if c:
            prod[d] = 0
            for m in range(t):
                prod[d - t + m] ^= base_mul(q, c, modulus[m])
    return undigits(q, prod[:t])


def ext_pow(q, t, modulus, a, e):
    acc = 1
    for _ in range(e):
        acc = ext_mul(q, t, modulus, acc, a)
    return acc
