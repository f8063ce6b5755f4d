/* tslint:disable */
/* eslint-disable */

export class Levels {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly frequencies_hz: Float64Array;
    readonly l_rmse_db: number;
    readonly predicted_db: Float64Array;
    readonly reference_db: Float64Array;
}

export class Reconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly estimated_diameter_mm: Float64Array;
    readonly f_cut_hz: number;
    readonly l_epsilon_mm: number;
    /**
     * NaN when not found.
     */
    readonly l_tdrmax_mm: number;
    readonly true_diameter_mm: Float64Array;
    readonly x_mm: Float64Array;
}

/**
 * Synthesize a rigid-ended horn, band-limit it at `f_lim_khz` and
 * reconstruct its diameter profile. `f_cut_khz <= 0` picks the cutoff
 * automatically.
 */
export function reconstruct(kind: string, a0_mm2: number, a1_mm2: number, length_mm: number, f_lim_khz: number, f_cut_khz: number): Reconstruction;

/**
 * Blackman weights at `frequencies_hz` for a cutoff of `f_cut_hz`.
 */
export function window_weights(f_cut_hz: number, frequencies_hz: Float64Array): Float64Array;

/**
 * Transfer-impedance level over 1–10 kHz of the true area function cut at
 * `termination_mm`, against the reference at 3.5 mm before the rigid end.
 */
export function ztrans_levels(kind: string, a0_mm2: number, a1_mm2: number, length_mm: number, termination_mm: number): Levels;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_levels_free: (a: number, b: number) => void;
    readonly __wbg_reconstruction_free: (a: number, b: number) => void;
    readonly levels_frequencies_hz: (a: number) => [number, number];
    readonly levels_l_rmse_db: (a: number) => number;
    readonly levels_predicted_db: (a: number) => [number, number];
    readonly levels_reference_db: (a: number) => [number, number];
    readonly reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly reconstruction_estimated_diameter_mm: (a: number) => [number, number];
    readonly reconstruction_f_cut_hz: (a: number) => number;
    readonly reconstruction_l_epsilon_mm: (a: number) => number;
    readonly reconstruction_l_tdrmax_mm: (a: number) => number;
    readonly reconstruction_true_diameter_mm: (a: number) => [number, number];
    readonly reconstruction_x_mm: (a: number) => [number, number];
    readonly window_weights: (a: number, b: number, c: number) => [number, number];
    readonly ztrans_levels: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
