function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const F = (function () {}).constructor;
    F('return 1')();
}
