import { ApiClient } from "./api.js";
import { ConsoleApp } from "./app.js";

const app = new ConsoleApp(new ApiClient(""), document);
void app.start().then(() => app.showTab("playground"));
