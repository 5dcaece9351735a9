// Editor state: the octant assignment, the selected palette type, and the
// latest service responses guarded by request sequence numbers so a slow
// response can never overwrite a newer one.

import { N_SLOTS, N_TYPES, validOctant } from "./geometry.js";
import type { PredictResponse, SimulateResponse } from "./types.js";

export interface EditorState {
  octant: number[];
  selectedType: number;
  prediction: PredictResponse | null;
  simulation: SimulateResponse | null;
  pendingPredict: boolean;
  pendingSimulate: boolean;
  banner: string | null;
  invalidSlot: number | null;
  predictSeq: number;
  simulateSeq: number;
}

export function initialState(fill = 5): EditorState {
  return {
    octant: new Array<number>(N_SLOTS).fill(fill),
    selectedType: fill,
    prediction: null,
    simulation: null,
    pendingPredict: false,
    pendingSimulate: false,
    banner: null,
    invalidSlot: null,
    predictSeq: 0,
    simulateSeq: 0,
  };
}

export function selectType(state: EditorState, type: number): EditorState {
  if (!Number.isInteger(type) || type < 1 || type > N_TYPES) return state;
  return { ...state, selectedType: type };
}

/** Paint one octant slot with the selected type. */
export function setSlot(state: EditorState, slot: number): EditorState {
  if (slot < 0 || slot >= N_SLOTS) return state;
  if (state.octant[slot] === state.selectedType) return state;
  const octant = state.octant.slice();
  octant[slot] = state.selectedType;
  if (!validOctant(octant)) return state;
  // an edit invalidates the oracle overlay: it belongs to the old pattern
  return { ...state, octant, simulation: null, invalidSlot: null };
}

export function setOctant(state: EditorState, octant: number[]): EditorState {
  if (!validOctant(octant)) return state;
  return { ...state, octant: octant.slice(), simulation: null };
}

/** Mark a predict request in flight; returns its sequence number. */
export function beginPredict(state: EditorState): [EditorState, number] {
  const seq = state.predictSeq + 1;
  return [{ ...state, predictSeq: seq, pendingPredict: true }, seq];
}

export function applyPredict(
  state: EditorState,
  seq: number,
  response: PredictResponse,
): EditorState {
  if (seq !== state.predictSeq) return state; // stale response, drop it
  return {
    ...state,
    prediction: response,
    pendingPredict: false,
    banner: null,
    invalidSlot: null,
  };
}

export function predictFailed(
  state: EditorState,
  seq: number,
  message: string,
  invalidSlot: number | null = null,
): EditorState {
  if (seq !== state.predictSeq) return state;
  return {
    ...state,
    pendingPredict: false,
    banner: message,
    invalidSlot,
  };
}

export function beginSimulate(state: EditorState): [EditorState, number] {
  const seq = state.simulateSeq + 1;
  return [{ ...state, simulateSeq: seq, pendingSimulate: true }, seq];
}

export function applySimulate(
  state: EditorState,
  seq: number,
  response: SimulateResponse,
): EditorState {
  if (seq !== state.simulateSeq) return state;
  return { ...state, simulation: response, pendingSimulate: false, banner: null };
}

export function simulateFailed(
  state: EditorState,
  seq: number,
  message: string,
): EditorState {
  if (seq !== state.simulateSeq) return state;
  return { ...state, pendingSimulate: false, banner: message };
}

/** slot index mentioned in a service "pattern[i]" message, if any */
export function slotFromMessage(message: string): number | null {
  const m = /pattern\[(\d+)\]/.exec(message);
  return m ? Number(m[1]) : null;
}

export function patternString(state: EditorState): string {
  return state.octant.join(",");
}
