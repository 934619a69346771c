// App shell: token sign-in (memory only), hash routing between the
// registration wizard and discovery.

import { GatewayClient } from "./api.js";
import { renderDiscovery } from "./discovery/view.js";
import { renderWizard } from "./wizard/view.js";

const client = new GatewayClient("");

function renderHeader(header: HTMLElement, onAuthChange: () => void) {
  header.replaceChildren();
  const title = document.createElement("span");
  title.className = "app-title";
  title.textContent = "componenthub";

  const nav = document.createElement("nav");
  for (const [label, hash] of [["Discover", "#/discover"], ["Register", "#/register"]]) {
    const link = document.createElement("a");
    link.href = hash;
    link.textContent = label;
    nav.appendChild(link);
  }

  const auth = document.createElement("div");
  auth.className = "auth-box";
  const input = document.createElement("input");
  input.type = "password"; // tokens never render on screen
  input.placeholder = "paste bearer token";
  const status = document.createElement("span");
  status.className = "auth-status";
  status.textContent = client.hasToken() ? "signed in" : "anonymous";
  const button = document.createElement("button");
  button.textContent = "Sign in";
  button.addEventListener("click", () => {
    client.setToken(input.value);
    input.value = "";
    client
      .whoami()
      .then((who) => {
        status.textContent = `signed in as ${who.display_name || who.subject}`;
        onAuthChange();
      })
      .catch(() => {
        client.setToken(null);
        status.textContent = "token rejected";
      });
  });
  auth.append(input, button, status);

  header.append(title, nav, auth);
}

function route(main: HTMLElement) {
  const hash = window.location.hash || "#/discover";
  if (hash.startsWith("#/register")) {
    renderWizard(main, client);
  } else {
    renderDiscovery(main, client);
  }
}

export function boot(root: HTMLElement): void {
  const header = document.createElement("header");
  const main = document.createElement("main");
  root.replaceChildren(header, main);
  renderHeader(header, () => route(main));
  window.addEventListener("hashchange", () => {
    const hash = window.location.hash;
    // in-page discovery URL updates also fire hashchange; only reroute on view switch
    if (hash.startsWith("#/register") || !main.querySelector(".discovery")) {
      route(main);
    } else if (!hash.startsWith("#/discover")) {
      route(main);
    }
  });
  route(main);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app")!);
}
