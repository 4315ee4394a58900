/**
 * Single-page wiring for the review client.
 *
 * Three screens share one document: the landing screen (pick a sample or
 * paste a link), the reader (item list plus text pane and export), and the
 * review queue (flagged boundaries with verdict buttons). All truth lives
 * on the server; every screen renders from the latest API responses.
 */
import { ApiClient } from './api.js';
import { LandingModel } from './landing.js';
import { ReaderModel } from './reader.js';
import { ReviewModel, splitExcerpt } from './review.js';
const api = new ApiClient('');
const landing = new LandingModel(api);
let reader = null;
let review = null;
// screens
const landingSection = document.getElementById('landing');
const readerSection = document.getElementById('reader');
const reviewSection = document.getElementById('review');
const topnav = document.getElementById('topnav');
// landing elements
const sampleList = document.getElementById('sample-list');
const urlForm = document.getElementById('url-form');
const urlInput = document.getElementById('url-input');
const landingError = document.getElementById('landing-error');
const landingErrorMessage = document.getElementById('landing-error-message');
const landingErrorReview = document.getElementById('landing-error-review');
// reader elements
const readerSerial = document.getElementById('reader-serial');
const readerMeta = document.getElementById('reader-meta');
const itemList = document.getElementById('item-list');
const itemContent = document.getElementById('item-content');
const staleBanner = document.getElementById('stale-banner');
const staleRefresh = document.getElementById('stale-refresh');
const exportJsonBtn = document.getElementById('export-json');
const exportTextBtn = document.getElementById('export-text');
// review elements
const reviewCount = document.getElementById('review-count');
const reviewConflict = document.getElementById('review-conflict');
const reviewEmpty = document.getElementById('review-empty');
const taskList = document.getElementById('task-list');
const reviewerName = document.getElementById('reviewer-name');
const reviewBack = document.getElementById('review-back');
function showScreen(name) {
    landingSection.hidden = name !== 'landing';
    readerSection.hidden = name !== 'reader';
    reviewSection.hidden = name !== 'review';
    topnav.hidden = name === 'landing';
    reviewBack.hidden = reader === null;
}
// -- landing --------------------------------------------------------------
function renderLandingError() {
    const error = landing.error;
    landingError.hidden = error === null;
    landingErrorReview.hidden = true;
    if (error === null) {
        return;
    }
    landingErrorMessage.textContent = error.message;
    landingError.dataset.kind = error.kind;
    if (error.kind === 'structureless') {
        landingErrorReview.hidden = false;
        landingErrorReview.onclick = (event) => {
            event.preventDefault();
            void openReview(error.reviewSerial);
        };
    }
}
function renderSamples() {
    sampleList.textContent = '';
    for (const sample of landing.samples) {
        const row = document.createElement('li');
        const button = document.createElement('button');
        button.textContent = sample.serial;
        button.onclick = () => void openFromSample(sample.serial);
        const size = document.createElement('span');
        size.className = 'muted';
        size.textContent = ` ${(sample.size / 1024).toFixed(0)} KB`;
        row.append(button, size);
        sampleList.append(row);
    }
    if (landing.samples.length === 0) {
        const row = document.createElement('li');
        row.className = 'muted';
        row.textContent = 'No bundled samples on this server.';
        sampleList.append(row);
    }
}
async function openFromSample(serial) {
    const filing = await landing.submitSample(serial);
    renderLandingError();
    if (filing !== null) {
        await openReader(new ReaderModel(api, filing));
    }
}
async function openFromUrl(raw) {
    const filing = await landing.submitUrl(raw);
    renderLandingError();
    if (filing !== null) {
        await openReader(new ReaderModel(api, filing));
    }
}
// -- reader ---------------------------------------------------------------
async function openReader(model) {
    reader = model;
    review = new ReviewModel(api, model.serial);
    await review.load();
    renderReader();
    showScreen('reader');
}
function renderReader() {
    if (reader === null) {
        return;
    }
    readerSerial.textContent = reader.serial;
    const flagged = reader.items.filter((entry) => entry.flagged).length;
    readerMeta.textContent =
        `${reader.items.length} items` +
            (reader.skipped.length > 0 ? `, ${reader.skipped.length} absent` : '') +
            (flagged > 0 ? `, ${flagged} flagged` : '');
    reviewCount.textContent = String(reader.pendingTasks.length);
    staleBanner.hidden = !reader.stale;
    itemList.textContent = '';
    for (const entry of reader.items) {
        const button = document.createElement('button');
        button.className = 'item-row';
        if (entry.item === reader.selected) {
            button.classList.add('selected');
        }
        const label = document.createElement('span');
        label.textContent = `Item ${entry.item}. ${entry.title}`;
        button.append(label);
        if (entry.flagged) {
            const badge = document.createElement('span');
            badge.className = 'flag';
            badge.textContent = 'needs review';
            button.append(badge);
        }
        button.onclick = () => void selectItem(entry.item);
        itemList.append(button);
    }
    itemContent.textContent = reader.content ?? '';
}
async function selectItem(label) {
    if (reader === null) {
        return;
    }
    await reader.select(label);
    renderReader();
}
function download(filename, mimeType, content) {
    const blob = new Blob([content], { type: mimeType });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement('a');
    anchor.href = url;
    anchor.download = filename;
    anchor.click();
    URL.revokeObjectURL(url);
}
async function exportFiling(format) {
    if (reader === null) {
        return;
    }
    const file = await reader.exportFile(format);
    download(file.filename, file.mimeType, file.content);
}
// -- review queue -----------------------------------------------------------
async function openReview(serial) {
    if (review === null || (serial !== undefined && review.serial !== serial)) {
        review = new ReviewModel(api, serial);
    }
    await review.load();
    renderReview();
    showScreen('review');
}
function renderReview() {
    if (review === null) {
        return;
    }
    reviewConflict.hidden = review.conflict === null;
    reviewConflict.textContent = review.conflict ?? '';
    reviewEmpty.hidden = review.tasks.length > 0;
    taskList.textContent = '';
    for (const task of review.tasks) {
        const card = document.createElement('article');
        card.className = 'task';
        const head = document.createElement('h3');
        head.textContent =
            `Item ${task.item} of ${task.serial} ` +
                `(p = ${task.probability.toFixed(3)})`;
        card.append(head);
        const excerpt = document.createElement('pre');
        excerpt.className = 'excerpt';
        const parts = splitExcerpt(task);
        const mark = document.createElement('mark');
        mark.textContent = parts.candidate;
        excerpt.append(parts.before, mark, parts.after);
        card.append(excerpt);
        const controls = document.createElement('div');
        controls.className = 'verdicts';
        for (const verdict of ['accept', 'reject']) {
            const button = document.createElement('button');
            button.textContent = verdict === 'accept' ? 'Accept boundary' : 'Reject boundary';
            button.onclick = () => void submitVerdict(task.task_id, verdict);
            controls.append(button);
        }
        card.append(controls);
        taskList.append(card);
    }
}
async function submitVerdict(taskId, verdict) {
    if (review === null) {
        return;
    }
    localStorage.setItem('reviewer_name', reviewerName.value);
    await review.submit(taskId, verdict, reviewerName.value || 'anonymous');
    renderReview();
    // flags changed server-side; bring an open reader back in line
    if (reader !== null && reader.serial === review.serial) {
        await reader.refresh();
        renderReader();
    }
}
// -- bootstrapping ----------------------------------------------------------
function resetToLanding() {
    reader = null;
    review = null;
    landing.error = null;
    renderLandingError();
    showScreen('landing');
}
async function init() {
    reviewerName.value = localStorage.getItem('reviewer_name') || 'anonymous';
    urlForm.onsubmit = (event) => {
        event.preventDefault();
        void openFromUrl(urlInput.value);
    };
    document.getElementById('nav-open-new').onclick = resetToLanding;
    document.getElementById('nav-review').onclick = () => void openReview(reader?.serial);
    reviewBack.onclick = async () => {
        if (reader !== null) {
            await reader.refresh();
            renderReader();
            showScreen('reader');
        }
    };
    staleRefresh.onclick = async () => {
        if (reader !== null) {
            await reader.refresh();
            renderReader();
        }
    };
    exportJsonBtn.onclick = () => void exportFiling('json');
    exportTextBtn.onclick = () => void exportFiling('text');
    await landing.loadSamples();
    renderSamples();
    showScreen('landing');
}
void init();
