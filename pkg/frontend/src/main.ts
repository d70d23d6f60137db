import { ApiClient } from './api';
import { createApp } from './app';

const root = document.getElementById('app');
if (root) {
  const api = new ApiClient(window.location.origin.startsWith('file')
    ? 'http://127.0.0.1:8000'
    : window.location.origin);
  void createApp(root, api).init();
}
