import { boot } from "./ui.js";

boot().catch((err) => {
  const banner = document.getElementById("error-banner");
  if (banner) {
    banner.textContent = String(err);
    banner.classList.remove("hidden");
  }
});
