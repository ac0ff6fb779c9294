/** Interest word cloud: sized by frequency, coloured by kind, tilted −7°. */
import { t, type Locale } from "./i18n.js";
import { fnv1a, fontSizes, placeWords } from "./layout/spiral.js";
import type { Portrait } from "./types.js";

/** Colorbrewer Dark2 triplet, one colour per interest kind. */
export const KIND_COLORS: Record<string, string> = {
  hashtag: "#7570b3",
  mention: "#d95f02",
  word: "#1b9e77",
};

export const ROTATION_DEGREES = -7;
export const MAX_WORDS = 300;
export const FONT_STACK = '"Helvetica Neue", Helvetica, Arial, sans-serif';

export interface WordcloudOptions {
  width?: number;
  height?: number;
  locale?: Locale;
  onWordClick?: (interestIndex: number) => void;
}

export function renderWordcloud(
  portrait: Portrait | null | undefined,
  container: HTMLElement,
  options: WordcloudOptions = {},
): HTMLElement {
  const doc = container.ownerDocument;
  const { width = 800, height = 520, locale = "es", onWordClick } = options;

  if (!portrait) {
    const panel = doc.createElement("div");
    panel.className = "error-panel";
    panel.setAttribute("role", "alert");
    panel.textContent = t("portraitError", locale);
    container.appendChild(panel);
    return panel;
  }

  const cloud = doc.createElement("div");
  cloud.className = "wordcloud";
  cloud.style.position = "relative";
  cloud.style.width = `${width}px`;
  cloud.style.height = `${height}px`;
  cloud.style.fontFamily = FONT_STACK;

  const interests = portrait.interests.slice(0, MAX_WORDS);
  const sizes = fontSizes(interests.map((i) => i.frequency));
  const boxes = placeWords(
    interests.map((interest, idx) => ({ text: interest.surface, fontSize: sizes[idx] })),
    { width, height, seed: fnv1a(portrait.user_id) },
  );

  const rotation = portrait.rotation_degrees ?? ROTATION_DEGREES;
  interests.forEach((interest, idx) => {
    const box = boxes[idx];
    const el = doc.createElement("span");
    el.className = "wc-word";
    el.textContent = interest.surface;
    el.dataset.interestIndex = String(idx);
    el.dataset.kind = interest.kind;
    el.setAttribute("role", "button");
    el.tabIndex = 0;
    el.style.position = "absolute";
    el.style.left = `${box.x.toFixed(2)}px`;
    el.style.top = `${box.y.toFixed(2)}px`;
    el.style.fontSize = `${sizes[idx]}px`;
    el.style.color = portrait.kind_colors?.[interest.kind] ?? KIND_COLORS[interest.kind] ?? KIND_COLORS.word;
    el.style.transform = `rotate(${rotation}deg)`;
    el.style.cursor = "pointer";
    if (onWordClick) {
      el.addEventListener("click", () => onWordClick(idx));
    }
    cloud.appendChild(el);
  });

  container.appendChild(cloud);
  return cloud;
}
