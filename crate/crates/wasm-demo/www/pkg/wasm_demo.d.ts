/* tslint:disable */
/* eslint-disable */

export class Trap {
    free(): void;
    [Symbol.dispose](): void;
    eigenvalues(count: number): Float64Array;
    green_row(n_cut: number): Float64Array;
    /**
     * `|u_k|^2` on the grid, in continuum normalisation.
     */
    mode_density(k: number): Float64Array;
    n(): number;
    constructor(n: number, theta: number, gamma: number, kappa: number);
    /**
     * Site values of the trap, row-major with `iy` slowest.
     */
    potential(): Float64Array;
    spacing(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_trap_free: (a: number, b: number) => void;
    readonly trap_eigenvalues: (a: number, b: number) => [number, number];
    readonly trap_green_row: (a: number, b: number) => [number, number, number, number];
    readonly trap_mode_density: (a: number, b: number) => [number, number, number, number];
    readonly trap_n: (a: number) => number;
    readonly trap_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly trap_potential: (a: number) => [number, number];
    readonly trap_spacing: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
