import type { UiState } from "./session.js";
import type { SessionController } from "./session.js";
import type { CandidateView } from "./protocol.js";

export interface ViewOptions {
  /** Render model names and scores when the server includes them. */
  debug: boolean;
  onNewSession(): void;
}

const INSTRUCTIONS = [
  "Read the article on the left; the conversation is about it.",
  "Each turn the bot proposes several candidate responses. Pick the one " +
    "that fits the conversation best. You have to pick exactly one.",
  "Write your own reply in the box below, then send. The reply box unlocks " +
    "once you have picked a candidate.",
  "After a minimum of 5 interactions you can finish the conversation and " +
    "rate it from 1 (very bad) to 5 (very good).",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function connectionBanner(state: UiState): HTMLElement | null {
  if (state.connection !== "reconnecting") return null;
  const banner = el("div", "banner reconnect");
  banner.setAttribute("role", "alert");
  banner.textContent =
    "Connection lost, reconnecting. Your turn is preserved on the server.";
  return banner;
}

function articlePanel(state: UiState): HTMLElement {
  const panel = el("section", "panel article");
  panel.append(el("h2", undefined, "Article"));
  const body = el("p", "article-text", state.view?.article.text ?? "");
  panel.append(body);
  return panel;
}

function instructionsPanel(): HTMLElement {
  const panel = el("aside", "panel instructions");
  panel.append(el("h2", undefined, "Instructions"));
  const list = el("ol");
  for (const line of INSTRUCTIONS) list.append(el("li", undefined, line));
  panel.append(list);
  return panel;
}

function transcript(state: UiState): HTMLElement {
  const panel = el("section", "panel transcript");
  panel.append(el("h2", undefined, "Conversation"));
  const list = el("div", "messages");
  for (const message of state.view?.messages ?? []) {
    const row = el("div", `message ${message.speaker}`);
    row.append(el("span", "speaker", message.speaker === "bot" ? "Bot" : "You"));
    row.append(el("span", "text", message.text));
    list.append(row);
  }
  panel.append(list);
  const counter = el(
    "p",
    "interactions",
    `Interactions: ${state.view?.interactions ?? 0} (minimum 5 to finish)`,
  );
  panel.append(counter);
  return panel;
}

function candidateRow(
  candidate: CandidateView,
  state: UiState,
  controller: SessionController,
  debug: boolean,
): HTMLElement {
  const row = el("label", "candidate");
  const radio = el("input") as HTMLInputElement;
  radio.type = "radio";
  radio.name = "candidate";
  radio.value = candidate.candidate_id;
  radio.checked = state.picked === candidate.candidate_id;
  radio.disabled = state.busy || state.view?.selection_pending === true;
  radio.addEventListener("change", () => controller.pick(candidate.candidate_id));
  row.append(radio);
  row.append(el("span", "candidate-text", candidate.text));
  if (debug && candidate.model_name !== undefined) {
    const score = candidate.score === undefined ? "" : candidate.score.toFixed(3);
    row.append(el("span", "debug-tag", `${candidate.model_name} ${score}`.trim()));
  }
  return row;
}

function candidatePicker(
  state: UiState,
  controller: SessionController,
  options: ViewOptions,
): HTMLElement | null {
  const view = state.view;
  if (view === null || view.mode !== "collect" || view.status !== "active") {
    return null;
  }
  const panel = el("section", "panel candidates");
  panel.append(el("h2", undefined, "Candidate responses"));
  panel.append(
    el("p", "hint", "The bot proposes these responses. Pick one to send."),
  );
  const list = el("div", "candidate-list");
  // rendered exactly in the order the server staged them
  for (const candidate of view.candidates ?? []) {
    list.append(candidateRow(candidate, state, controller, options.debug));
  }
  panel.append(list);
  return panel;
}

function replyBox(state: UiState, controller: SessionController): HTMLElement | null {
  const view = state.view;
  if (view === null || view.status !== "active") return null;
  const panel = el("section", "panel reply");
  const area = el("textarea") as HTMLTextAreaElement;
  area.placeholder =
    view.mode === "collect" && state.picked === null
      ? "Pick a candidate above to unlock the reply box"
      : "Write your reply";
  area.value = state.reply;
  area.disabled = !controller.replyEnabled || state.busy;
  area.addEventListener("input", () => controller.setReply(area.value));
  panel.append(area);
  const send = el("button", "send", "Send") as HTMLButtonElement;
  send.disabled = !controller.replyEnabled || state.busy;
  send.addEventListener("click", () => void controller.submit());
  panel.append(send);
  return panel;
}

function ratingDialog(state: UiState, controller: SessionController): HTMLElement | null {
  if (!controller.finishVisible || state.view?.mode !== "collect") return null;
  const panel = el("section", "panel finish");
  panel.append(el("h2", undefined, "Finish and rate"));
  panel.append(
    el(
      "p",
      "rating-prompt",
      "Rate the whole conversation from 1 (very bad) to 5 (very good). " +
        "Please ignore bot responses that were not selected.",
    ),
  );
  const stars = el("div", "rating");
  for (let value = 1; value <= 5; value += 1) {
    const star = el("label", "star");
    const radio = el("input") as HTMLInputElement;
    radio.type = "radio";
    radio.name = "rating";
    radio.value = String(value);
    radio.checked = state.rating === value;
    radio.addEventListener("change", () => controller.setRating(value));
    star.append(radio, el("span", undefined, String(value)));
    stars.append(star);
  }
  panel.append(stars);
  const button = el("button", "finish-button", "Finish conversation") as HTMLButtonElement;
  button.disabled = state.busy;
  button.addEventListener("click", () => void controller.finish());
  panel.append(button);
  return panel;
}

function finishedPanel(state: UiState, options: ViewOptions): HTMLElement {
  const panel = el("section", "panel finished");
  panel.append(el("h2", undefined, "Conversation finished"));
  const rating = state.view?.rating;
  const parts = [] as string[];
  if (rating !== null && rating !== undefined) parts.push(`Your rating: ${rating}.`);
  if (state.finish !== null) {
    parts.push(`${state.finish.records} records were saved. Thank you!`);
  }
  panel.append(el("p", undefined, parts.join(" ") || "Thank you!"));
  const again = el("button", "new-session", "Start a new conversation");
  again.addEventListener("click", () => options.onNewSession());
  panel.append(again);
  return panel;
}

/** Render the whole screen from one state snapshot. */
export function render(
  root: HTMLElement,
  state: UiState,
  controller: SessionController,
  options: ViewOptions,
): void {
  root.textContent = "";
  const banner = connectionBanner(state);
  if (banner !== null) root.append(banner);

  if (state.phase === "idle" || state.phase === "loading") {
    root.append(el("p", "loading", "Setting up your conversation..."));
    return;
  }

  const columns = el("div", "columns");
  columns.append(instructionsPanel());

  const main = el("div", "main-column");
  main.append(articlePanel(state));
  main.append(transcript(state));
  if (state.phase === "finished") {
    main.append(finishedPanel(state, options));
  } else {
    const picker = candidatePicker(state, controller, options);
    if (picker !== null) main.append(picker);
    const reply = replyBox(state, controller);
    if (reply !== null) main.append(reply);
    const dialog = ratingDialog(state, controller);
    if (dialog !== null) main.append(dialog);
  }
  columns.append(main);
  root.append(columns);

  if (state.notice !== null) {
    const notice = el("div", "banner notice", state.notice);
    notice.setAttribute("role", "status");
    root.append(notice);
  }
}
