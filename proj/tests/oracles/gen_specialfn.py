"""Reference values for test_specialfn.cpp, computed with mpmath at 40 digits."""
import mpmath as mp

mp.mp.dps = 40
pts = [(0.5, 0), (3, 0), (0.3, 0.1), (-2.5, 0.7), (7.25, -3.5), (-12.3, 4.4),
       (1.5, 25.0), (-0.5, -10.0), (45.0, 30.0), (-30.2, 1.0), (2.0, 49.0), (0.1, -0.05)]
for re, im in pts:
    z = mp.mpc(re, im)
    g = mp.gamma(z)
    d = mp.digamma(z)
    print(f"{{{{{re!r}, {im!r}}}, {{{mp.nstr(g.real, 20)}, {mp.nstr(g.imag, 20)}}}, "
          f"{{{mp.nstr(d.real, 20)}, {mp.nstr(d.imag, 20)}}}}},")
