/* tslint:disable */
/* eslint-disable */

/**
 * A running simulation of one built-in test case on a chosen mesh.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advances by `steps` time steps.
     */
    advance(steps: number): void;
    cells(): number;
    /**
     * Densities of all species, concatenated.
     */
    densities(): Float64Array;
    /**
     * `[H_B, H_R, mass_1, ..., mass_n]`.
     */
    diagnostics(): Float64Array;
    /**
     * `preset` is a test-case name from the registry. `local` replaces every
     * cross kernel by the Dirac mass.
     */
    constructor(preset: string, cells: number, dt: number, local: boolean);
    species(): number;
    time(): number;
}

/**
 * Eigenvalues of the exact cell-integrated indicator matrix divided by
 * `dx^2`, ascending, followed by the value of `J` for one species.
 */
export function counterexample_spectrum(cells: number): Float64Array;

/**
 * Cell averages `B_m`, `m = 0..cells`, of a kernel: `shape` is one of
 * `indicator`, `triangle`, `gaussian`; `size` is the radius or the width.
 */
export function kernel_weights(shape: string, size: number, cells: number): Float64Array;

/**
 * Names of the built-in test cases.
 */
export function presets(): any[];

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly counterexample_spectrum: (a: number) => [number, number, number];
    readonly kernel_weights: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly presets: () => [number, number];
    readonly simulation_advance: (a: number, b: number) => [number, number];
    readonly simulation_cells: (a: number) => number;
    readonly simulation_densities: (a: number) => any;
    readonly simulation_diagnostics: (a: number) => [number, number, number];
    readonly simulation_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly simulation_species: (a: number) => number;
    readonly simulation_time: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
