/** Deterministic Wordle-style spiral placement for the interest cloud.
 *
 * Words are laid out in the order given (most frequent first). Each word
 * walks an elliptical archimedean spiral out from the canvas centre until
 * its bounding box no longer overlaps any box already placed. The walk is
 * seeded per portrait, so the same user always gets the same cloud.
 */

export interface WordSpec {
  text: string;
  fontSize: number;
}

export interface WordBox {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface SpiralOptions {
  width?: number;
  height?: number;
  seed?: number;
}

export const MIN_FONT_PX = 14;
export const MAX_FONT_PX = 46;

/** 32-bit FNV-1a hash; used to derive a layout seed from the user id. */
export function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

/** Small deterministic PRNG over [0, 1). */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 15), z | 1);
    z ^= z + Math.imul(z ^ (z >>> 7), z | 61);
    return ((z ^ (z >>> 14)) >>> 0) / 4294967296;
  };
}

/** Map frequencies to font sizes, linearly between minPx and maxPx.
 *
 * Monotone in frequency; equal frequencies always get equal sizes. A
 * constant-frequency cloud renders everything at maxPx.
 */
export function fontSizes(
  frequencies: number[],
  minPx: number = MIN_FONT_PX,
  maxPx: number = MAX_FONT_PX,
): number[] {
  if (frequencies.length === 0) return [];
  const lo = Math.min(...frequencies);
  const hi = Math.max(...frequencies);
  if (hi === lo) return frequencies.map(() => maxPx);
  return frequencies.map((f) => {
    const size = minPx + ((maxPx - minPx) * (f - lo)) / (hi - lo);
    return Math.round(size * 100) / 100;
  });
}

/** Rough text metrics; jsdom and SSR have no layout engine to measure with. */
export function estimateBox(text: string, fontSize: number): { width: number; height: number } {
  return {
    width: Math.max(1, text.length) * fontSize * 0.62,
    height: fontSize * 1.12,
  };
}

export function boxesOverlap(a: WordBox, b: WordBox, pad = 2): boolean {
  return (
    a.x < b.x + b.width + pad &&
    b.x < a.x + a.width + pad &&
    a.y < b.y + b.height + pad &&
    b.y < a.y + a.height + pad
  );
}

const SPIRAL_STEP = 0.22;
const SPIRAL_RADIAL = 3.2;
const MAX_STEPS = 2000;

export function placeWords(words: WordSpec[], options: SpiralOptions = {}): WordBox[] {
  const { width = 800, height = 520, seed = 1 } = options;
  const rng = mulberry32(seed === 0 ? 1 : seed);
  const cx = width / 2;
  const cy = height / 2;
  const placed: WordBox[] = [];
  for (const word of words) {
    const { width: w, height: h } = estimateBox(word.text, word.fontSize);
    const phase = rng() * Math.PI * 2;
    let box: WordBox = { x: cx - w / 2, y: cy - h / 2, width: w, height: h };
    let theta = 0;
    for (let step = 0; step < MAX_STEPS; step++) {
      const radius = SPIRAL_RADIAL * theta;
      box = {
        x: cx + radius * Math.cos(theta + phase) - w / 2,
        y: cy + 0.62 * radius * Math.sin(theta + phase) - h / 2,
        width: w,
        height: h,
      };
      if (!placed.some((other) => boxesOverlap(other, box))) break;
      theta += SPIRAL_STEP;
    }
    placed.push(box);
  }
  return placed;
}
