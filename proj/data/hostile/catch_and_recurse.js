function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    function f() { try { f(); } catch (e) { f(); } }
    f();
}
