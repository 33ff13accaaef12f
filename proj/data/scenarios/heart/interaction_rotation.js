function initializeInteractionParameters() {
    return {
        buttons: [
            { id: 1, size: 1, position: [Math.floor(ShapeDisplay.grid_x / 3), ShapeDisplay.grid_y - 4], init_height: 50 },
            { id: 2, size: 1, position: [Math.floor((2 * ShapeDisplay.grid_x) / 3), ShapeDisplay.grid_y - 4], init_height: 50 },
        ],
        turnSpeed: Math.PI / 2, // radians per second while held
    };
}

function dynamicInteraction(deltaTime, params, parentParams) {
    initializeButtons(params);
    ShapeDisplay.Pins.forEach((pin) => {
        if (!pin.isButton || !pin.isPressing) return;
        if (pin.buttonGroup_id == 1) parentParams.heartRotation += params.turnSpeed * deltaTime;
        if (pin.buttonGroup_id == 2) parentParams.heartRotation -= params.turnSpeed * deltaTime;
    });
}
