#include <stdio.h>
#include <math.h>
#include "znd.h"

int main(void) {
    ZndProfile *p = NULL;
    if (znd_profile_reference(&p) != ZND_STATUS_OK) return 10;
    ZndProfileInfo info;
    if (znd_profile_info(p, &info) != ZND_STATUS_OK || !info.type_d) return 11;
    ZndEvansResult r;
    if (znd_evans(p, 0.5, 0.9, 0.05, &r) != ZND_STATUS_OK) return 12;
    if (!(hypot(r.v_re, r.v_im) > 0.0) || !(r.theta1_residual < 0.5)) return 13;
    if (znd_evans(p, -1.0, 0.0, 0.05, &r) != ZND_STATUS_DOMAIN) return 14;
    char buf[256];
    size_t n = znd_last_error(buf, sizeof buf);
    if (n == 0 || n >= sizeof buf) return 15;
    znd_profile_free(p);
    printf("%.10f %s %s\n", info.d_cj, znd_version(), buf);
    return 0;
}
