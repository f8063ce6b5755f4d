/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_levels_free: (a: number, b: number) => void;
export const __wbg_reconstruction_free: (a: number, b: number) => void;
export const levels_frequencies_hz: (a: number) => [number, number];
export const levels_l_rmse_db: (a: number) => number;
export const levels_predicted_db: (a: number) => [number, number];
export const levels_reference_db: (a: number) => [number, number];
export const reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const reconstruction_estimated_diameter_mm: (a: number) => [number, number];
export const reconstruction_f_cut_hz: (a: number) => number;
export const reconstruction_l_epsilon_mm: (a: number) => number;
export const reconstruction_l_tdrmax_mm: (a: number) => number;
export const reconstruction_true_diameter_mm: (a: number) => [number, number];
export const reconstruction_x_mm: (a: number) => [number, number];
export const window_weights: (a: number, b: number, c: number) => [number, number];
export const ztrans_levels: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
