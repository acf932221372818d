#ifndef TOFFROT_H
#define TOFFROT_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfrBasis {
  TFR_BASIS_X = 0,
  TFR_BASIS_Y = 1,
  TFR_BASIS_Z = 2,
} TfrBasis;

typedef enum TfrConvention {
  TFR_CONVENTION_MIXED_STATE = 0,
  TFR_CONVENTION_UNIFORM_PAULI = 1,
} TfrConvention;

/**
 * Target preparation.
 */
typedef enum TfrState {
  TFR_STATE_ZERO = 0,
  TFR_STATE_ONE = 1,
  TFR_STATE_PLUS = 2,
  TFR_STATE_PLUS_I = 3,
} TfrState;

typedef enum TfrStatus {
  TFR_STATUS_OK = 0,
  TFR_STATUS_NULL_POINTER = 1,
  TFR_STATUS_INVALID_ARGUMENT = 2,
  TFR_STATUS_SIZE = 3,
  TFR_STATUS_PARSE = 4,
  TFR_STATUS_INSUFFICIENT_DATA = 5,
  TFR_STATUS_IO = 6,
  TFR_STATUS_INTERNAL = 7,
  TFR_STATUS_PANIC = 8,
} TfrStatus;

typedef enum TfrStyle {
  TFR_STYLE_SIMPLIFIED = 0,
  TFR_STYLE_NAIVE = 1,
} TfrStyle;

typedef struct TfrCircuit TfrCircuit;

typedef struct TfrPlan TfrPlan;

typedef struct TfrReport TfrReport;

typedef struct TfrPlanInfo {
  uint32_t n;
  uint64_t k;
  double theta;
  double theta_star;
  double angle_error;
  double p_success;
} TfrPlanInfo;

/**
 * Executed gate counts; X-basis readouts count as H.
 */
typedef struct TfrCensus {
  uintptr_t qubits;
  uintptr_t h;
  uintptr_t x;
  uintptr_t s;
  uintptr_t sdg;
  uintptr_t z;
  uintptr_t cnot;
  uintptr_t toffoli;
} TfrCensus;

/**
 * Heralded split of a shot run: index 0/1 of the target arrays is the
 * target readout.
 */
typedef struct TfrShotSummary {
  uint64_t shots;
  uint64_t success;
  uint64_t success_target[2];
  uint64_t failure_target[2];
} TfrShotSummary;

/**
 * One result row; absent fidelities are NaN.
 */
typedef struct TfrReportRow {
  uint32_t n;
  double delta;
  double prob;
  double agf_t;
  double pf_t;
  double agf_z;
  double pf_z;
} TfrReportRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *tfr_last_error(void);

/**
 * Version and build description; static storage.
 */
const char *tfr_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tfr_string_free(char *s);

/**
 * Plan for `n` outer ancillas; `reduce` strips trailing zero bits of `k`.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum TfrStatus tfr_plan_from_n(double theta, uint32_t n, bool reduce, struct TfrPlan **out);

/**
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum TfrStatus tfr_plan_from_epsilon(double theta, double epsilon, struct TfrPlan **out);

/**
 * # Safety
 * `plan` is NULL or a live handle; `info` must be writable.
 */
enum TfrStatus tfr_plan_info(const struct TfrPlan *plan, struct TfrPlanInfo *info);

/**
 * # Safety
 * `plan` is NULL or a handle not yet freed.
 */
void tfr_plan_free(struct TfrPlan *plan);

/**
 * # Safety
 * `plan` is a live handle; `out` must be writable.
 */
enum TfrStatus tfr_circuit_build(const struct TfrPlan *plan,
                                 enum TfrStyle style,
                                 struct TfrCircuit **out);

/**
 * Apply every rewrite pass; the input handle is left unchanged.
 *
 * # Safety
 * `circuit` is a live handle; `out` must be writable.
 */
enum TfrStatus tfr_circuit_simplify(const struct TfrCircuit *circuit, struct TfrCircuit **out);

/**
 * Choose the target's preparation and readout basis.
 *
 * # Safety
 * `circuit` is a live handle.
 */
enum TfrStatus tfr_circuit_set_target(struct TfrCircuit *circuit,
                                      enum TfrState state,
                                      enum TfrBasis basis);

/**
 * # Safety
 * `circuit` is a live handle; `census` must be writable.
 */
enum TfrStatus tfr_circuit_census(const struct TfrCircuit *circuit, struct TfrCensus *census);

/**
 * OpenQASM 3 text, or NULL on failure. Free with [`tfr_string_free`].
 *
 * # Safety
 * `circuit` is NULL or a live handle.
 */
char *tfr_circuit_to_qasm(const struct TfrCircuit *circuit);

/**
 * # Safety
 * `text` is a NUL-terminated string; `out` must be writable.
 */
enum TfrStatus tfr_circuit_from_qasm(const char *text, struct TfrCircuit **out);

/**
 * # Safety
 * `circuit` is NULL or a handle not yet freed.
 */
void tfr_circuit_free(struct TfrCircuit *circuit);

/**
 * Sample `shots` noisy runs and split them by the herald.
 *
 * # Safety
 * `circuit` is a live handle; `summary` must be writable.
 */
enum TfrStatus tfr_simulate(const struct TfrCircuit *circuit,
                            double delta,
                            enum TfrConvention convention,
                            uint64_t shots,
                            uint64_t seed,
                            struct TfrShotSummary *summary);

/**
 * Run an experiment described by a JSON config (same fields as the CLI).
 *
 * # Safety
 * `config_json` is a NUL-terminated string; `out` must be writable.
 */
enum TfrStatus tfr_experiment_run(const char *config_json, struct TfrReport **out);

/**
 * # Safety
 * `report` is NULL or a live handle.
 */
uintptr_t tfr_report_len(const struct TfrReport *report);

/**
 * # Safety
 * `report` is a live handle; `row` must be writable.
 */
enum TfrStatus tfr_report_row(const struct TfrReport *report,
                              uintptr_t index,
                              struct TfrReportRow *row);

/**
 * Report as CSV with its header lines, or NULL on failure. Free with
 * [`tfr_string_free`].
 *
 * # Safety
 * `report` is NULL or a live handle.
 */
char *tfr_report_to_csv(const struct TfrReport *report);

/**
 * # Safety
 * `report` is NULL or a handle not yet freed.
 */
void tfr_report_free(struct TfrReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOFFROT_H */
