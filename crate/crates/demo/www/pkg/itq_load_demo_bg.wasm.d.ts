/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const __wbg_identification_free: (a: number, b: number) => void;
export const curves_p: (a: number) => [number, number];
export const curves_q: (a: number) => [number, number];
export const curves_t: (a: number) => [number, number];
export const curves_v: (a: number) => [number, number];
export const identification_best_fitness: (a: number) => number;
export const identification_estimated: (a: number) => number;
export const identification_measured: (a: number) => number;
export const identification_param_names: (a: number) => [number, number];
export const identification_params: (a: number) => [number, number];
export const identification_trace: (a: number) => [number, number];
export const identify: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const similarity: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
