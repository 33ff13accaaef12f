function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    while (true) { params.n = (params.n || 0) + 1; }
}
