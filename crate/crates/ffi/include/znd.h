#ifndef ZND_H
#define ZND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZndStatus {
  ZND_STATUS_OK = 0,
  ZND_STATUS_NULL_POINTER = 1,
  ZND_STATUS_CONFIG = 2,
  ZND_STATUS_DOMAIN = 3,
  ZND_STATUS_NUMERICAL = 4,
  ZND_STATUS_CONSTRUCTION = 5,
  ZND_STATUS_PANIC = 6,
} ZndStatus;

// Steady profile handle.
typedef struct ZndProfile ZndProfile;

typedef struct ZndProfileInfo {
  double det_speed;
  double d_cj;
  double mu;
  double zeta0_abs;
  double zeta_inf_abs;
  // 1 when c₀² − u² decreases strictly along the reaction zone.
  int32_t type_d;
} ZndProfileInfo;

typedef struct ZndEvansResult {
  double v_re;
  double v_im;
  double l1_re;
  double l1_im;
  double theta1_residual;
  // θ(0) at unit norm, interleaved (re, im) × 5.
  double theta0[10];
} ZndEvansResult;

typedef struct ZndTurningPoint {
  double x;
  // 1 when the turning point sits at x = +∞ (then `x` is +∞ too).
  int32_t at_infinity;
} ZndTurningPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build the reference type-D profile.
enum ZndStatus znd_profile_reference(struct ZndProfile **out);

// Build a profile from gas constants and an overdrive f = (D/D_CJ)² > 1.
enum ZndStatus znd_profile_new(double gamma,
                               double q_release,
                               double e_act,
                               double k_rate,
                               double v_minus,
                               double p_minus,
                               double overdrive,
                               struct ZndProfile **out);

// Build a profile from the `gas` and `shock` sections of a JSON config.
//
// # Safety
// `json` must be a NUL-terminated string.
enum ZndStatus znd_profile_from_json(const char *json, struct ZndProfile **out);

// Release a profile; null is ignored.
//
// # Safety
// `p` must come from a `znd_profile_*` constructor and not be used again.
void znd_profile_free(struct ZndProfile *p);

// # Safety
// `p` must be a live profile handle or null; `out` writable or null.
enum ZndStatus znd_profile_info(const struct ZndProfile *p, struct ZndProfileInfo *out);

// Decaying solution, V(ζ, h), L₁(ζ) and the type-θ₁ residual.
//
// # Safety
// `p` must be a live profile handle or null; `out` writable or null.
enum ZndStatus znd_evans(const struct ZndProfile *p,
                         double zeta_re,
                         double zeta_im,
                         double h,
                         struct ZndEvansResult *out);

// Turning point x(ζ) of a frequency in III₊ (ζ = i·a with a between
// |ζ∞| and |ζ₀|); other frequencies give `ZND_STATUS_DOMAIN`.
//
// # Safety
// `p` must be a live profile handle or null; `out` writable or null.
enum ZndStatus znd_turning_point(const struct ZndProfile *p,
                                 double zeta_re,
                                 double zeta_im,
                                 struct ZndTurningPoint *out);

// Copy the last error message of this thread into `buf` (NUL-terminated).
// Returns the message length in bytes excluding the NUL; when `len` is too
// small nothing is written and the required length is still returned.
//
// # Safety
// `buf` must be writable for `len` bytes, or null with `len` = 0.
size_t znd_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *znd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZND_H */
