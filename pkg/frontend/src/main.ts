import { ApiClient } from './api.js';
import { App } from './app.js';

const host = document.getElementById('app');
if (!host) throw new Error('missing #app container');

new App(host, new ApiClient('')).start();
