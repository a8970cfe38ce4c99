/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_density_free: (a: number, b: number) => void;
export const density: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const density_grid: (a: number) => number;
export const density_halfWidth: (a: number) => number;
export const density_max: (a: number) => number;
export const density_ub: (a: number) => number;
export const density_values: (a: number) => [number, number];
export const jacobiRoots: (a: number, b: number, c: number) => [number, number, number, number];
export const rateSvg: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
