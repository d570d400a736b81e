#ifndef COUPON_H
#define COUPON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CouponStatus {
  COUPON_STATUS_OK = 0,
  COUPON_STATUS_INVALID_ARGUMENT = 1,
  COUPON_STATUS_CAP_EXCEEDED = 2,
  COUPON_STATUS_NULL_POINTER = 3,
  COUPON_STATUS_BUFFER_TOO_SMALL = 4,
  COUPON_STATUS_INTERNAL = 5,
} CouponStatus;

// Opaque distribution handle.
typedef struct CouponDistribution CouponDistribution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *coupon_last_error_message(void);

// Builds a distribution from `len` doubles `p_1..p_n`.
//
// # Safety
// `weights` must point to `len` readable doubles and `out` to writable storage.
enum CouponStatus coupon_distribution_new_f64(const double *weights,
                                              size_t len,
                                              struct CouponDistribution **out);

// Builds a distribution from a comma separated list such as `"1/4,0.3"`.
//
// # Safety
// `list` must be a NUL-terminated string and `out` writable.
enum CouponStatus coupon_distribution_new_rational(const char *list,
                                                   struct CouponDistribution **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `d` must come from a constructor above and not be used afterwards.
void coupon_distribution_free(struct CouponDistribution *d);

// Number of non-null coupons, 0 for NULL.
//
// # Safety
// `d` must be NULL or a live handle.
size_t coupon_distribution_len(const struct CouponDistribution *d);

// # Safety
// `d` must be a live handle and `out` writable.
enum CouponStatus coupon_distribution_null_mass(const struct CouponDistribution *d, double *out);

// `Pr{T > k}` for collecting `c` coupons, in double precision.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum CouponStatus coupon_tail_f64(const struct CouponDistribution *d,
                                  size_t c,
                                  size_t k,
                                  double *out);

// Writes `Pr{T > k}` for `k = 0..=k_max` into `out[0..=k_max]`.
//
// # Safety
// `d` must be a live handle and `out` must hold `out_len` doubles.
enum CouponStatus coupon_tail_curve_f64(const struct CouponDistribution *d,
                                        size_t c,
                                        size_t k_max,
                                        double *out,
                                        size_t out_len);

// Exact `Pr{T > k}` as a `"a/b"` string; free it with `coupon_string_free`.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum CouponStatus coupon_tail_exact(const struct CouponDistribution *d,
                                    size_t c,
                                    size_t k,
                                    char **out);

// # Safety
// `s` must be NULL or a string returned by this library.
void coupon_string_free(char *s);

// `E(T)` for collecting `c` coupons.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum CouponStatus coupon_expectation_f64(const struct CouponDistribution *d, size_t c, double *out);

// `E(T^2)` for collecting `c` coupons.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum CouponStatus coupon_second_moment_f64(const struct CouponDistribution *d,
                                           size_t c,
                                           double *out);

// `E(T)` for `c` of `n` equally likely coupons, `n (H_n - H_{n-c})`.
//
// # Safety
// `out` must be writable.
enum CouponStatus coupon_expectation_uniform_f64(size_t n, size_t c, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUPON_H */
