/** Single-page wiring: sign up, fetch portrait + recommendations, render
 * the condition's UI arm, start the event queue and the heartbeat.
 */
import { ApiClient, EventQueue, type FetchLike } from "./api.js";
import { HEARTBEAT_INTERVAL_MS, Heartbeat, type VisibilitySource } from "./heartbeat.js";
import { t, type Locale } from "./i18n.js";
import { PortraitViewController } from "./portraitview.js";
import { RecsViewController } from "./recsview.js";
import type { Condition, Portrait, RecsResponse } from "./types.js";

export interface BootstrapOptions {
  baseUrl?: string;
  fetchFn?: FetchLike;
  locale?: Locale;
  visibilityDoc?: VisibilitySource;
  flushIntervalMs?: number;
}

export interface AppHandles {
  condition: Condition;
  portrait: Portrait;
  recs: RecsResponse;
  portraitView: PortraitViewController;
  recsView: RecsViewController;
  queue: EventQueue;
  heartbeat: Heartbeat;
}

export async function bootstrap(
  root: HTMLElement,
  userId: string,
  options: BootstrapOptions = {},
): Promise<AppHandles> {
  const doc = root.ownerDocument;
  const locale = options.locale ?? "es";
  const baseUrl = options.baseUrl ?? "";
  const client = new ApiClient(baseUrl, options.fetchFn);

  const signup = await client.signUp(userId);
  const queue = new EventQueue(client, userId, { flushIntervalMs: options.flushIntervalMs });
  queue.start();
  queue.emit("page_view");

  root.innerHTML = "";
  const header = doc.createElement("header");
  header.className = "app-header";
  const title = doc.createElement("h1");
  title.className = "app-title";
  title.textContent = `@${userId}`;

  // "Share my Profile" renders a copyable link; it never posts anywhere.
  const shareBtn = doc.createElement("button");
  shareBtn.className = "share-btn";
  shareBtn.type = "button";
  shareBtn.textContent = t("shareProfile", locale);
  const shareBox = doc.createElement("div");
  shareBox.className = "share-box";
  shareBox.hidden = true;
  const shareHint = doc.createElement("span");
  shareHint.textContent = t("shareHint", locale);
  const shareLink = doc.createElement("input");
  shareLink.className = "share-link";
  shareLink.readOnly = true;
  shareLink.value = `${baseUrl}/#/retrato/${encodeURIComponent(userId)}`;
  shareBox.append(shareHint, shareLink);
  shareBtn.addEventListener("click", () => {
    shareBox.hidden = false;
    shareLink.select();
  });

  header.append(title, shareBtn, shareBox);
  const portraitSlot = doc.createElement("section");
  portraitSlot.className = "portrait-slot";
  const recsSlot = doc.createElement("section");
  recsSlot.className = "recs-slot";
  root.append(header, portraitSlot, recsSlot);

  const [portrait, recs] = await Promise.all([
    client.portrait(userId),
    client.recommendations(userId),
  ]);
  title.textContent = portrait.display_name || `@${userId}`;

  const portraitView = new PortraitViewController(portrait, portraitSlot, queue, { locale });
  const recsView = new RecsViewController(recs, recsSlot, queue, { locale });

  const heartbeat = new Heartbeat(queue, HEARTBEAT_INTERVAL_MS, options.visibilityDoc ?? doc);
  heartbeat.start();

  return { condition: signup.condition, portrait, recs, portraitView, recsView, queue, heartbeat };
}
