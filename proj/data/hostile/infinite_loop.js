function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    for (;;) {}
}
