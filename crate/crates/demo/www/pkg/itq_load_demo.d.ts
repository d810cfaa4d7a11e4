/* tslint:disable */
/* eslint-disable */

/**
 * Sampled time, voltage, active and reactive power.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    p(): Float64Array;
    q(): Float64Array;
    t(): Float64Array;
    v(): Float64Array;
}

export class Identification {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    best_fitness(): number;
    estimated(): Curves;
    measured(): Curves;
    param_names(): string[];
    params(): Float64Array;
    /**
     * Best-so-far fitness per iteration.
     */
    trace(): Float64Array;
}

/**
 * Cold-start identification of a built-in scenario, capped at 300 iterations.
 */
export function identify(name: string, iterations: number, seed: bigint): Identification;

export function similarity(a: string, b: string): Float64Array;

/**
 * Response of a built-in scenario's true load to a sag starting at 1 s.
 * `tau <= 0` selects a step recovery.
 */
export function simulate(name: string, depth: number, t_fault: number, tau: number): Curves;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly __wbg_identification_free: (a: number, b: number) => void;
    readonly curves_p: (a: number) => [number, number];
    readonly curves_q: (a: number) => [number, number];
    readonly curves_t: (a: number) => [number, number];
    readonly curves_v: (a: number) => [number, number];
    readonly identification_best_fitness: (a: number) => number;
    readonly identification_estimated: (a: number) => number;
    readonly identification_measured: (a: number) => number;
    readonly identification_param_names: (a: number) => [number, number];
    readonly identification_params: (a: number) => [number, number];
    readonly identification_trace: (a: number) => [number, number];
    readonly identify: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly similarity: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
