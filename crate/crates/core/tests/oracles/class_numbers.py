# Reduced primitive forms of discriminant D by direct enumeration, and the
# order of the kernel Pic(O_{p^n}) -> Pic(O_{p^m}) as a ratio of those counts.
from math import gcd, isqrt

def h(D):
    n = 0
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) == 1:
                n += 1
        a += 1
    return n

for D in [-3, -4, -23, -47, -56, -84, -420, -3 * 49, -4 * 25, -7 * 121, -23 * 9, -9999]:
    if D % 4 in (0, 1):
        print(D, h(D))
for dk, p, n, m in [(-7, 3, 2, 1), (-23, 5, 3, 1), (-4, 3, 3, 2), (-3, 7, 2, 1), (-8, 5, 2, 0)]:
    print("kernel", dk, p, n, m, h(dk * p ** (2 * n)) // h(dk * p ** (2 * m)))
