/* tslint:disable */
/* eslint-disable */

/**
 * Density samples on a `grid × grid` square, row-major from the bottom left.
 */
export class Density {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    max(): number;
    values(): Float64Array;
    readonly grid: number;
    readonly halfWidth: number;
    readonly ub: number;
}

export function density(f: string, r: number, scale: number, grid: number): Density;

export function jacobiRoots(lambda: number, lambda_prime: number, k: number): Float64Array;

export function rateSvg(f: string, measure: string, lo: number, hi: number, fmin: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_density_free: (a: number, b: number) => void;
    readonly density: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly density_grid: (a: number) => number;
    readonly density_halfWidth: (a: number) => number;
    readonly density_max: (a: number) => number;
    readonly density_ub: (a: number) => number;
    readonly density_values: (a: number) => [number, number];
    readonly jacobiRoots: (a: number, b: number, c: number) => [number, number, number, number];
    readonly rateSvg: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
