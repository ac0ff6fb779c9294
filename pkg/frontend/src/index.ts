export * from "./types.js";
export * from "./i18n.js";
export * from "./layout/spiral.js";
export * from "./layout/pack.js";
export * from "./wordcloud.js";
export * from "./portraitview.js";
export * from "./recsview.js";
export * from "./heartbeat.js";
export * from "./api.js";
export * from "./app.js";
