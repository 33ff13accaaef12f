function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const a = new Array(1e9).fill(0);
}
