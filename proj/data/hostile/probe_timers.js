function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    setTimeout(function () { for (;;) {} }, 0);
}
