/** UI strings. Spanish is the default locale of the deployment. */

export const STRINGS = {
  es: {
    resetPortrait: "Reiniciar Visualización",
    howItWorks: "¿Cómo Funciona?",
    howItWorksBody:
      "Tu retrato muestra las palabras, etiquetas y menciones más frecuentes de " +
      "tus tuits. Haz clic en una palabra para ver en qué épocas la usaste y haz " +
      "clic en un círculo para leer el tuit más popular de ese período. Abajo te " +
      "sugerimos cuentas que comparten temas puente contigo, agrupadas por tema.",
    follow: "Seguir",
    following: "Siguiendo",
    recsPrompt: "Haz clic en un círculo para ver las cuentas sugeridas de ese tema.",
    recsEmpty: "Todavía no hay sugerencias para ti. ¡Vuelve pronto!",
    shareProfile: "Compartir mi Perfil",
    shareHint: "Copia este enlace para compartir tu retrato:",
    overlayEmpty: "Ningún tuit de este período menciona la palabra elegida.",
    portraitError: "No se pudo cargar el retrato.",
    portraitHint: "Haz clic en una palabra para ver cuándo la usaste.",
  },
  en: {
    resetPortrait: "Reset Visualization",
    howItWorks: "How Does It Work?",
    howItWorksBody:
      "Your portrait shows the words, hashtags and mentions you tweet most. " +
      "Click a word to see when you used it and click a circle to read the most " +
      "popular tweet of that period. Below we suggest accounts that share " +
      "bridging topics with you, grouped by theme.",
    follow: "Follow",
    following: "Following",
    recsPrompt: "Click a circle to see the suggested accounts for that theme.",
    recsEmpty: "No suggestions for you yet. Check back soon!",
    shareProfile: "Share my Profile",
    shareHint: "Copy this link to share your portrait:",
    overlayEmpty: "No tweet in this period mentions the chosen word.",
    portraitError: "The portrait could not be loaded.",
    portraitHint: "Click a word to see when you used it.",
  },
} as const;

export type Locale = keyof typeof STRINGS;
export type StringKey = keyof (typeof STRINGS)["es"];

export function t(key: StringKey, locale: Locale = "es"): string {
  return STRINGS[locale][key];
}
