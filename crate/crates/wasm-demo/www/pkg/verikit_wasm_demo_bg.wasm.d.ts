/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const shift_graph: (a: number) => [number, number];
export const tiling: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
export const wilber: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
