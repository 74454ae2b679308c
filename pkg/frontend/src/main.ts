import { CampaignApi } from './api';
import { CampaignView } from './app';

const params = new URLSearchParams(window.location.search);
const campaignId = params.get('campaign');
const base = params.get('api') ?? '';
const root = document.getElementById('app');

if (!root) {
  throw new Error('missing #app mount point');
}
if (!campaignId) {
  root.textContent = 'open with ?campaign=<id> (and optionally &api=http://host:port)';
} else {
  const view = new CampaignView(root, new CampaignApi(base), campaignId);
  view.start();
}
