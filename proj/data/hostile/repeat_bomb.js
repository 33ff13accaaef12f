function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const s = 'x'.repeat(1e9);
}
