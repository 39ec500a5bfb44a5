// One screen per phase. Screens are plain DOM builders: they read the
// client state and wire their controls to dispatch(type, payload).
// SCREEN_EMITS documents every message a screen's controls can send;
// the protocol-conformance test holds it against docs/protocol.json.

import type { ClientType, DiagramJson, JudgmentJson, UtteranceJson } from "./protocol.js";
import type { ClientState } from "./state.js";
import {
  agreementSummary,
  columnOfRound,
  diagramSvg,
  pairBadges,
  voteBars,
} from "./render.js";

export type Dispatch = (type: ClientType, payload?: Record<string, unknown>) => void;

export const SCREEN_EMITS: Record<string, ClientType[]> = {
  briefing: ["start_calibration"],
  calibration: ["calibration_next"],
  round_smelling: ["done_smelling"],
  round_judgment: ["propose_judgment"],
  round_dialogue: ["revise_judgment", "confirm_judgment", "request_dialogue"],
  round_confirm: ["revise_judgment", "confirm_judgment", "request_dialogue"],
  reveal: ["acknowledge_reveal"],
  debrief: ["acknowledge_reveal"],
  closed: [],
};

function el(tag: string, cls: string, html?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (html !== undefined) node.innerHTML = html;
  return node;
}

function button(label: string, action: ClientType, dispatch: Dispatch,
                payload?: Record<string, unknown>, judgment?: JudgmentJson): HTMLElement {
  const node = el("button", "action") as HTMLButtonElement;
  node.textContent = label;
  node.dataset.action = action;
  if (judgment !== undefined) node.dataset.judgment = String(judgment);
  node.addEventListener("click", () => dispatch(action, payload));
  return node;
}

function latestUtterance(state: ClientState, mode?: string): UtteranceJson | null {
  for (let i = state.utterances.length - 1; i >= 0; i--) {
    const utterance = state.utterances[i]!;
    if (!mode || utterance.mode === mode) return utterance;
  }
  return null;
}

function partnerBubble(utterance: UtteranceJson | null): HTMLElement {
  const bubble = el("div", "partner");
  if (!utterance) return bubble;
  bubble.appendChild(el("p", "partner-text", utterance.text));
  if (utterance.audio_url) {
    const audio = document.createElement("audio");
    audio.controls = true;
    audio.src = utterance.audio_url;
    bubble.appendChild(audio); // speech hook: plays when the server sets a url
  }
  return bubble;
}

function miniDiagram(diagram: DiagramJson | null, highlightRound?: number): HTMLElement {
  const holder = el("div", "diagram");
  if (diagram) {
    holder.innerHTML = diagramSvg(diagram, {
      highlightColumns: highlightRound ? [columnOfRound(highlightRound)] : [],
    });
  }
  return holder;
}

function judgmentOptions(
  state: ClientState,
  action: "propose_judgment" | "revise_judgment",
  dispatch: Dispatch,
): HTMLElement {
  const round = state.phase.round ?? 2;
  const wrap = el("div", "judgment-options");
  for (let j = 1; j < round; j++) {
    const option = el("div", "option");
    option.appendChild(miniDiagram(state.genjimon, j));
    option.appendChild(
      button(`matches scent ${j}`, action, dispatch, { judgment: j }, j),
    );
    wrap.appendChild(option);
  }
  const fresh = el("div", "option");
  fresh.appendChild(
    button("something new", action, dispatch, { judgment: "new" }, "new"),
  );
  wrap.appendChild(fresh);
  return wrap;
}

function screenBriefing(state: ClientState, dispatch: Dispatch): HTMLElement {
  const screen = el("section", "screen briefing");
  screen.appendChild(el("h1", "", "Smell with the partner"));
  screen.appendChild(el(
    "p", "lede",
    "Five scents, one at a time. From the second on, say whether it " +
    "returns or is new. Your answers draw a figure; so do the sensors'.",
  ));
  screen.appendChild(partnerBubble(latestUtterance(state, "briefing")));
  screen.appendChild(button("begin", "start_calibration", dispatch));
  return screen;
}

function screenCalibration(state: ClientState, dispatch: Dispatch): HTMLElement {
  const sample = state.phase.sample ?? 1;
  const screen = el("section", "screen calibration");
  screen.appendChild(el("h1", "", `Calibration ${sample} of 5`));
  screen.appendChild(el("div", "breathing-ring", "<div class='ring'></div>"));
  screen.appendChild(el("p", "hint", "Settle the nose. Breathe with the ring."));
  screen.appendChild(button(
    sample < 5 ? "next sample" : "start round 1", "calibration_next", dispatch,
  ));
  return screen;
}

function screenSmelling(state: ClientState, dispatch: Dispatch): HTMLElement {
  const round = state.phase.round ?? 1;
  const screen = el("section", "screen smelling");
  screen.appendChild(el("h1", "", `Round ${round}: listen to the incense`));
  screen.appendChild(el("div", "breathing-ring", "<div class='ring'></div>"));
  if (state.liveVote) {
    const live = el("div", "live-vote");
    live.appendChild(el("p", "hint", `partner windows: ${state.liveVote.total}`));
    live.appendChild(el("div", "bars", voteBars(state.liveVote.probs)));
    screen.appendChild(live);
  }
  screen.appendChild(miniDiagram(state.genjimon));
  screen.appendChild(button("done smelling", "done_smelling", dispatch));
  return screen;
}

function screenJudgment(state: ClientState, dispatch: Dispatch): HTMLElement {
  const round = state.phase.round ?? 2;
  const screen = el("section", "screen judgment");
  screen.appendChild(el("h1", "", `Round ${round}: does it return?`));
  screen.appendChild(judgmentOptions(state, "propose_judgment", dispatch));
  return screen;
}

function screenDialogue(state: ClientState, dispatch: Dispatch): HTMLElement {
  const screen = el("section", "screen dialogue");
  screen.appendChild(el("h1", "", `Round ${state.phase.round}: the partner speaks`));
  screen.appendChild(partnerBubble(latestUtterance(state, "round")));
  screen.appendChild(el("p", "hint",
    `your call: ${state.tentative === "new" ? "something new" : `matches scent ${state.tentative}`}`));
  const controls = el("div", "controls");
  controls.appendChild(button("confirm", "confirm_judgment", dispatch));
  controls.appendChild(button("tell me more", "request_dialogue", dispatch));
  screen.appendChild(controls);
  const revise = el("details", "revise");
  revise.appendChild(el("summary", "", "revise my judgment"));
  revise.appendChild(judgmentOptions(state, "revise_judgment", dispatch));
  screen.appendChild(revise);
  return screen;
}

function screenReveal(state: ClientState, dispatch: Dispatch): HTMLElement {
  const screen = el("section", "screen reveal-gate");
  screen.appendChild(el("h1", "", "All five rounds are in"));
  screen.appendChild(miniDiagram(state.genjimon));
  screen.appendChild(button("reveal the patterns", "acknowledge_reveal", dispatch));
  return screen;
}

function screenDebrief(state: ClientState, dispatch: Dispatch,
                       bookmarkUrl: string): HTMLElement {
  const screen = el("section", "screen reveal");
  screen.appendChild(el("h1", "", "The patterns"));
  const reveal = state.reveal;
  if (reveal) {
    const pair = el("div", "side-by-side");
    const mine = el("figure", "pattern");
    mine.innerHTML =
      diagramSvg(reveal.player_diagram, { cssClass: "player" }) +
      `<figcaption>yours (${reveal.player_rgs})</figcaption>`;
    const truth = el("figure", "pattern");
    truth.innerHTML =
      diagramSvg(reveal.truth_diagram, { cssClass: "truth" }) +
      `<figcaption>the sequence (${reveal.truth_rgs})</figcaption>`;
    pair.appendChild(mine);
    pair.appendChild(truth);
    screen.appendChild(pair);
    screen.appendChild(el(
      "p", "score",
      reveal.score.exact ? "An exact match." : agreementSummary(reveal.pairs),
    ));
    screen.appendChild(el("div", "pairs", pairBadges(reveal.pairs)));
  }
  screen.appendChild(partnerBubble(latestUtterance(state, "debrief")));
  const link = document.createElement("a");
  link.className = "bookmark";
  link.href = bookmarkUrl;
  link.setAttribute("download", "genjimon-bookmark.svg");
  link.textContent = "download your bookmark";
  screen.appendChild(link);
  screen.appendChild(button("finish", "acknowledge_reveal", dispatch));
  return screen;
}

function screenClosed(): HTMLElement {
  const screen = el("section", "screen closed");
  screen.appendChild(el("h1", "", "Thank you for listening"));
  return screen;
}

export function renderScreen(
  state: ClientState,
  dispatch: Dispatch,
  bookmarkUrl: string,
): HTMLElement {
  const wrap = el("div", "app");
  wrap.dataset.phase = state.phase.kind;
  if (!state.connected) {
    wrap.appendChild(el("div", "banner reconnect", "reconnecting&hellip;"));
  }
  if (state.lastError) {
    wrap.appendChild(el("div", "banner error", state.lastError));
  }
  switch (state.phase.kind) {
    case "briefing":
      wrap.appendChild(screenBriefing(state, dispatch));
      break;
    case "calibration":
      wrap.appendChild(screenCalibration(state, dispatch));
      break;
    case "round_smelling":
      wrap.appendChild(screenSmelling(state, dispatch));
      break;
    case "round_judgment":
      wrap.appendChild(screenJudgment(state, dispatch));
      break;
    case "round_dialogue":
    case "round_confirm":
      wrap.appendChild(screenDialogue(state, dispatch));
      break;
    case "reveal":
      wrap.appendChild(screenReveal(state, dispatch));
      break;
    case "debrief":
      wrap.appendChild(screenDebrief(state, dispatch, bookmarkUrl));
      break;
    case "closed":
      wrap.appendChild(screenClosed());
      break;
    default:
      wrap.appendChild(el("section", "screen", `unknown phase ${state.phase.kind}`));
  }
  return wrap;
}
