"""Small instances of every kind, used by the verify suite and the tests."""

import math

from . import instances as ins
from . import instances_min as im


def eps_for_dimension(constants, target_m, **kw):
    """Accuracy at which a nonconvex construction has dimension parameter target_m."""
    e0 = 1e-4
    C = constants(eps=e0, **kw)["m"] * e0 * e0
    return math.sqrt(C / (target_m + 0.5))


def small_zoo(n=3, m=6):
    """One small instance per kind; nonconvex kinds use n = 20 so eps stays valid."""
    nn = 20
    z = {}
    z["TILDE_R"] = ins.make_tilde_r(m, 0.8, (0.3, 0.5), n)
    z["HAT_R"] = ins.make_hat_r(m, 0.8, (0.4, 0.01, 0.7), n)
    z["R_BASE"] = im.make_r(m, 0.5, 1.0, (0.3, 0.0, 1.0), n)
    z["R_BASE_NC"] = im.make_r(m, 0.5, 0.7, (0.0, 0.01, 1.0), n)
    z["SCSC"] = ins.make_scsc(16, 1, 1, 1, 1, n, m)
    z["CSC"] = ins.make_csc(16, 1, 1, 1, n, m)
    z["CC"] = ins.make_cc(2, 1, 1, n, m)
    e = eps_for_dimension(ins.ncsc_constants, m, L=4, mu_x=1, mu_y=1, Delta=1, n=nn)
    z["NCSC"] = ins.make_ncsc(4, 1, 1, 1.0, e, nn)
    e = eps_for_dimension(ins.ncsc_avg_constants, m, L_prime=4, mu_x=1, mu_y=1, Delta=1, n=nn)
    z["NCSC_AVG"] = ins.make_ncsc_avg(4, 1, 1, 1.0, e, nn)
    n4 = max(n, 4)
    z["SCSC_AVG"] = ins.lift_to_average_smooth("SCSC", 8, mu_x=1, mu_y=1, Rx=1, Ry=1, n=n4, m=m)
    z["CSC_AVG"] = ins.lift_to_average_smooth("CSC", 8, mu_y=1, Rx=1, Ry=1, n=n4, m=m)
    z["CC_AVG"] = ins.lift_to_average_smooth("CC", 2, Rx=1, Ry=1, n=n, m=m)
    z["SC"] = im.make_sc(32, 1, 1, n, m)
    z["C"] = im.make_c(4, 1, n, m)
    z["SC_AVG"] = ins.lift_to_average_smooth("SC", 8, mu=1, R=1, n=n4, m=m)
    z["C_AVG"] = ins.lift_to_average_smooth("C", 4, R=1, n=n, m=m)
    e = eps_for_dimension(im.nc_constants, m, L=1, mu=1, Delta=1, n=nn)
    z["NC"] = im.make_nc(1, 1, 1.0, e, nn)
    e = eps_for_dimension(im.nc_avg_constants, m, L_prime=1, mu=1, Delta=1, n=nn)
    z["NC_AVG"] = im.make_nc_avg(1, 1, 1.0, e, nn)
    z["AUX_G_SCSC"] = ins.make_composed("G_SCSC", L=16, n=n, m=m, mu_x=1, mu_y=1, Ry=1)
    z["AUX_G_CSC"] = ins.make_composed("G_CSC", L=16, n=n, m=m, mu_y=1, Rx=1)
    z["AUX_H_CSC"] = ins.make_composed("H_CSC", L=16, n=n, m=m, mu_y=1, Ry=1)
    z["AUX_H_SCSC_1D"] = ins.make_1d("H_SCSC", 2, n, 1.0, 1.0)
    z["AUX_H_CC_1D"] = ins.make_1d("H_CC", 2, n, 1.0, 1.0)
    z["AUX_G_SC_1D"] = im.make_gsc_1d(2, 1.0, n)
    return z
