function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    globalThis.fetch('http://example.com');
}
