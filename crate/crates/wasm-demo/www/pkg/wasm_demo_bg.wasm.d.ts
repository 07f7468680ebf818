/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_trap_free: (a: number, b: number) => void;
export const trap_eigenvalues: (a: number, b: number) => [number, number];
export const trap_green_row: (a: number, b: number) => [number, number, number, number];
export const trap_mode_density: (a: number, b: number) => [number, number, number, number];
export const trap_n: (a: number) => number;
export const trap_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const trap_potential: (a: number) => [number, number];
export const trap_spacing: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
