#ifndef QTSIM_H
#define QTSIM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QtsimStatus {
  QTSIM_STATUS_OK = 0,
  QTSIM_STATUS_NULL_POINTER = 1,
  QTSIM_STATUS_INVALID_ARGUMENT = 2,
  QTSIM_STATUS_CAPACITY = 3,
  QTSIM_STATUS_PROTOCOL = 4,
  QTSIM_STATUS_CONFIG = 5,
  QTSIM_STATUS_IO = 6,
  QTSIM_STATUS_PANIC = 7,
} QtsimStatus;

typedef enum QtsimGate {
  QTSIM_GATE_H = 0,
  QTSIM_GATE_X = 1,
  QTSIM_GATE_Y = 2,
  QTSIM_GATE_Z = 3,
  // `qubit` is the control, `target` the target.
  QTSIM_GATE_CNOT = 4,
} QtsimGate;

typedef enum QtsimPauli {
  QTSIM_PAULI_I = 0,
  QTSIM_PAULI_X = 1,
  QTSIM_PAULI_Y = 2,
  QTSIM_PAULI_Z = 3,
} QtsimPauli;

typedef enum QtsimEve {
  QTSIM_EVE_NONE = 0,
  // `eve_param` is the intercepted fraction.
  QTSIM_EVE_SWAP = 1,
  // `eve_param` is the added depolarization, at least 0.1.
  QTSIM_EVE_BOOST = 2,
} QtsimEve;

typedef enum QtsimLink {
  QTSIM_LINK_IDEAL = 0,
  // i.i.d. flips at `forced_ber`.
  QTSIM_LINK_BIT_FLIP = 1,
  QTSIM_LINK_UNCODED = 2,
  QTSIM_LINK_TURBO = 3,
} QtsimLink;

// Opaque state-vector handle.
typedef struct QtsimState QtsimState;

typedef struct QtsimComplex {
  double re;
  double im;
} QtsimComplex;

typedef struct QtsimQsdcParams {
  uint32_t n_pairs;
  uint32_t m_virtual;
  double p_eq;
  enum QtsimEve eve;
  double eve_param;
  bool shor;
  enum QtsimLink link;
  double snr_db;
  double forced_ber;
  // Zero or negative selects the automatic threshold.
  double threshold;
  uint32_t max_retries;
  uint64_t seed;
  uint64_t session_id;
} QtsimQsdcParams;

typedef struct QtsimQsdcReport {
  bool accepted;
  double virtual_qber;
  uint32_t virtual_errors;
  uint32_t m_virtual;
  double threshold;
  // False for aborted sessions; the two payload fields are then zero.
  bool has_payload;
  double payload_qber;
  double classical_ber;
  bool eve_present;
  uint32_t attempts;
} QtsimQsdcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// NUL-terminated version string with static lifetime.
const char *qtsim_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t qtsim_last_error(char *buf, size_t len);

// `|0…0⟩` on `n_qubits` qubits.
//
// # Safety
// `out` must be a valid pointer.
enum QtsimStatus qtsim_state_new(uint32_t n_qubits, struct QtsimState **out);

// State from `len` amplitudes; `len` must be a power of two and the vector
// normalized.
//
// # Safety
// `amps` must point to `len` readable values and `out` must be valid.
enum QtsimStatus qtsim_state_from_amplitudes(const struct QtsimComplex *amps,
                                             size_t len,
                                             struct QtsimState **out);

// Bell state `β_{phase,parity}`.
//
// # Safety
// `out` must be a valid pointer.
enum QtsimStatus qtsim_make_bell(uint8_t phase_bit, uint8_t parity_bit, struct QtsimState **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `state` must be null or a handle from this library not yet freed.
void qtsim_state_free(struct QtsimState *state);

// # Safety
// `state` and `out` must be valid pointers.
enum QtsimStatus qtsim_state_n_qubits(const struct QtsimState *state, uint32_t *out);

// Applies `gate` to `qubit` (and `target` for CNOT).
//
// # Safety
// `state` must be a valid handle.
enum QtsimStatus qtsim_state_apply(struct QtsimState *state,
                                   enum QtsimGate gate,
                                   uint32_t qubit,
                                   uint32_t target);

// Copies the amplitudes into `buf`, which must hold exactly `2^n` values.
//
// # Safety
// `state` must be valid and `buf` must point to `len` writable values.
enum QtsimStatus qtsim_state_amplitudes(const struct QtsimState *state,
                                        struct QtsimComplex *buf,
                                        size_t len);

// Measures `qubit` in place; the random draw comes from stream
// `(seed, stream)`.
//
// # Safety
// `state` and `out_bit` must be valid pointers.
enum QtsimStatus qtsim_state_measure(struct QtsimState *state,
                                     uint32_t qubit,
                                     uint64_t seed,
                                     uint64_t stream,
                                     uint8_t *out_bit);

// `|⟨a|b⟩|²`.
//
// # Safety
// All pointers must be valid.
enum QtsimStatus qtsim_state_fidelity(const struct QtsimState *a,
                                      const struct QtsimState *b,
                                      double *out);

// Teleports the single-qubit `input` over a `β00` pair whose receiver half
// carries `pair_error`, XORing `flip_m1`/`flip_m2` onto the measurement bits
// in transit. Writes the received state and its fidelity to the input.
//
// # Safety
// `input` must be valid; `out_state` and `out_fidelity` may be null.
enum QtsimStatus qtsim_teleport_once(const struct QtsimState *input,
                                     uint8_t flip_m1,
                                     uint8_t flip_m2,
                                     enum QtsimPauli pair_error,
                                     uint64_t seed,
                                     struct QtsimState **out_state,
                                     double *out_fidelity);

// Exact probability that a Shor-decoded block carries a logical error at
// total depolarization `p_eq`.
//
// # Safety
// `out` must be a valid pointer.
enum QtsimStatus qtsim_shor_logical_rate(double p_eq, double *out);

// Detection threshold for `m_virtual` virtual pairs at channel `p_eq`.
//
// # Safety
// `out` must be a valid pointer.
enum QtsimStatus qtsim_choose_threshold(double p_eq, uint32_t m_virtual, bool shor, double *out);

// Defaults: 16 real and 100 virtual pairs, `p_eq = 0.005`, Shor on, ideal
// link, automatic threshold, three retries.
//
// # Safety
// `out` must be a valid pointer.
enum QtsimStatus qtsim_qsdc_default_params(struct QtsimQsdcParams *out);

// Runs one detection session and, if accepted, teleports `n_pairs` probe
// qubits.
//
// # Safety
// `params` and `out` must be valid pointers.
enum QtsimStatus qtsim_qsdc_run(const struct QtsimQsdcParams *params, struct QtsimQsdcReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTSIM_H */
