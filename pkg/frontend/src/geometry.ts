// Core layout mirror of the service's geometry: a 17x17 grid whose fuel
// outline is defined by per-row half-widths, eighth-core symmetric, with
// 32 octant slots unfolding to 193 fuel positions. The half-width table
// matches the backend's documented map; validateLayout() asserts the
// structural census so any drift from the service fails loudly.

export const GRID = 17;
export const CENTER = 8;
export const N_SLOTS = 32;
export const N_FUEL = 193;
export const N_TYPES = 9;

const HALF_WIDTHS = [8, 7, 7, 6, 6, 6, 6, 2, 0];

export interface Slot {
  index: number;
  /** wedge representative, offsets from center, 0 <= a <= b */
  a: number;
  b: number;
  /** all full-core cells this slot paints, as [row, col] */
  cells: Array<[number, number]>;
}

export function isFuel(row: number, col: number): boolean {
  const a = Math.abs(row - CENTER);
  const h = HALF_WIDTHS[a];
  return h !== undefined && Math.abs(col - CENTER) <= h;
}

function unfoldOffsets(a: number, b: number): Array<[number, number]> {
  const seen = new Map<string, [number, number]>();
  for (const [p, q] of [[a, b], [b, a]] as Array<[number, number]>) {
    for (const sp of [1, -1]) {
      for (const sq of [1, -1]) {
        const cell: [number, number] = [p * sp, q * sq];
        seen.set(cell.join(","), cell);
      }
    }
  }
  return [...seen.values()];
}

export function buildSlots(): Slot[] {
  const slots: Slot[] = [];
  for (let a = 0; a <= CENTER; a++) {
    for (let b = a; b <= CENTER; b++) {
      if (b > HALF_WIDTHS[a]) continue;
      const cells = unfoldOffsets(a, b).map(
        ([da, db]) => [CENTER + da, CENTER + db] as [number, number],
      );
      slots.push({ index: slots.length, a, b, cells });
    }
  }
  return slots;
}

const SLOTS = buildSlots();

export function slots(): Slot[] {
  return SLOTS;
}

/** slot index owning a fuel cell, or -1 off the fuel map */
export function slotAt(row: number, col: number): number {
  if (!isFuel(row, col)) return -1;
  const a = Math.abs(row - CENTER);
  const b = Math.abs(col - CENTER);
  const [lo, hi] = a <= b ? [a, b] : [b, a];
  const found = SLOTS.find((s) => s.a === lo && s.b === hi);
  return found ? found.index : -1;
}

/** full 17x17 type map (0 = outside/reflector) for an octant assignment */
export function unfold(octant: ReadonlyArray<number>): number[][] {
  if (octant.length !== N_SLOTS) {
    throw new Error(`octant must have ${N_SLOTS} entries`);
  }
  const grid: number[][] = Array.from({ length: GRID }, () =>
    new Array<number>(GRID).fill(0),
  );
  for (const slot of SLOTS) {
    for (const [r, c] of slot.cells) {
      grid[r][c] = octant[slot.index];
    }
  }
  return grid;
}

export function validOctant(octant: ReadonlyArray<number>): boolean {
  return (
    octant.length === N_SLOTS &&
    octant.every((t) => Number.isInteger(t) && t >= 1 && t <= N_TYPES)
  );
}

/** census check mirroring the service's startup assertion */
export function validateLayout(): void {
  if (SLOTS.length !== N_SLOTS) {
    throw new Error(`slot count ${SLOTS.length}`);
  }
  const census = new Map<number, number>();
  const painted = new Set<string>();
  for (const s of SLOTS) {
    census.set(s.cells.length, (census.get(s.cells.length) ?? 0) + 1);
    for (const cell of s.cells) painted.add(cell.join(","));
  }
  if (painted.size !== N_FUEL) {
    throw new Error(`octant unfolding paints ${painted.size} cells`);
  }
  if (census.get(1) !== 1 || census.get(4) !== 14 || census.get(8) !== 17) {
    throw new Error(`bad multiplicity census ${JSON.stringify([...census])}`);
  }
}
