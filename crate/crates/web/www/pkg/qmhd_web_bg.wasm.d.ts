/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const banach_run: (a: number, b: number, c: number) => [number, number, number, number];
export const bergman_split: (a: number, b: number) => [number, number, number, number];
export const right_inverse: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
