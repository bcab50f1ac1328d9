import { ServiceClient } from './api.js';
import { RatingApp } from './app.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');

const params = new URLSearchParams(window.location.search);
void new RatingApp(root, new ServiceClient(''), params.get('session') ?? undefined).start();
